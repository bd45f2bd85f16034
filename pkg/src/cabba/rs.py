"""Shortened Reed-Solomon codes over GF(2^m); RS(54,34) over GF(64) by default.

Codewords are lists of symbols with the highest-degree coefficient first,
message symbols followed by parity (systematic).  Decoding is
Berlekamp-Massey, Chien search and Forney.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import RsUncorrectable


class GaloisField:
    def __init__(self, bits: int = 6, prim: int = 0x43):
        self.bits = bits
        self.order = (1 << bits) - 1
        self.exp = [0] * (2 * self.order)
        self.log = [0] * (self.order + 1)
        x = 1
        for i in range(self.order):
            self.exp[i] = x
            self.log[x] = i
            x <<= 1
            if x >> bits:
                x ^= prim
        if x != 1:
            raise ValueError(f"{prim:#x} is not primitive for GF(2^{bits})")
        for i in range(self.order, 2 * self.order):
            self.exp[i] = self.exp[i - self.order]

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError
        if a == 0:
            return 0
        return self.exp[(self.log[a] - self.log[b]) % self.order]

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0
        return self.exp[(self.log[a] * e) % self.order]

    def inv(self, a: int) -> int:
        return self.div(1, a)


def _poly_eval_low(gf: GaloisField, poly: list[int], x: int) -> int:
    """Evaluate a low-order-first polynomial."""
    y = 0
    for coef in reversed(poly):
        y = gf.mul(y, x) ^ coef
    return y


class ReedSolomon:
    def __init__(self, n: int = 54, k: int = 34, bits: int = 6, prim: int = 0x43, fcr: int = 1):
        self.gf = GaloisField(bits, prim)
        if not 0 < k < n <= self.gf.order:
            raise ValueError(f"invalid RS({n},{k}) over GF(2^{bits})")
        self.n, self.k, self.fcr = n, k, fcr
        self.nsym = n - k
        gen = [1]  # high-order first
        for i in range(self.nsym):
            root = self.gf.exp[(fcr + i) % self.gf.order]
            nxt = gen + [0]
            for j, c in enumerate(gen):
                nxt[j + 1] ^= self.gf.mul(c, root)
            gen = nxt
        self.generator = gen

    @property
    def correctable(self) -> int:
        return self.nsym // 2

    def encode(self, message: list[int]) -> list[int]:
        if len(message) != self.k:
            raise ValueError(f"expected {self.k} message symbols, got {len(message)}")
        if any(not 0 <= s <= self.gf.order for s in message):
            raise ValueError("symbol out of field range")
        rem = list(message) + [0] * self.nsym
        for i in range(self.k):
            coef = rem[i]
            if coef:
                for j in range(1, len(self.generator)):
                    rem[i + j] ^= self.gf.mul(self.generator[j], coef)
        return list(message) + rem[self.k:]

    def syndromes(self, codeword: list[int]) -> list[int]:
        out = []
        for j in range(self.nsym):
            x = self.gf.exp[(self.fcr + j) % self.gf.order]
            y = 0
            for c in codeword:
                y = self.gf.mul(y, x) ^ c
            out.append(y)
        return out

    def decode(self, codeword: list[int]) -> tuple[list[int], int]:
        """Return (message symbols, number of corrected symbols)."""
        if len(codeword) != self.n:
            raise ValueError(f"expected {self.n} symbols, got {len(codeword)}")
        gf = self.gf
        synd = self.syndromes(codeword)
        if not any(synd):
            return list(codeword[: self.k]), 0

        # Berlekamp-Massey, polynomials low-order first
        lam, prev = [1], [1]
        length, shift, last_d = 0, 1, 1
        for step in range(self.nsym):
            d = synd[step]
            for i in range(1, length + 1):
                if i < len(lam):
                    d ^= gf.mul(lam[i], synd[step - i])
            if d == 0:
                shift += 1
                continue
            scale = gf.div(d, last_d)
            upd = lam + [0] * max(0, len(prev) + shift - len(lam))
            for i, c in enumerate(prev):
                upd[i + shift] ^= gf.mul(scale, c)
            if 2 * length <= step:
                prev, lam = lam, upd
                length, last_d, shift = step + 1 - length, d, 1
            else:
                lam = upd
                shift += 1
        while len(lam) > 1 and lam[-1] == 0:
            lam.pop()
        if len(lam) - 1 != length or length > self.correctable:
            raise RsUncorrectable(f"error locator degree {length} exceeds capability")

        # Chien search restricted to the shortened positions
        positions = []
        for p in range(self.n):
            x_inv = gf.exp[(gf.order - (self.n - 1 - p)) % gf.order]
            if _poly_eval_low(gf, lam, x_inv) == 0:
                positions.append(p)
        if len(positions) != length:
            raise RsUncorrectable("error locator roots fall outside the codeword")

        omega = [0] * self.nsym
        for i, s in enumerate(synd):
            for j, c in enumerate(lam):
                if i + j < self.nsym:
                    omega[i + j] ^= gf.mul(s, c)
        dlam = [lam[i] if i % 2 == 1 else 0 for i in range(1, len(lam))]

        fixed = list(codeword)
        for p in positions:
            x = gf.exp[(self.n - 1 - p) % gf.order]
            x_inv = gf.inv(x)
            denom = _poly_eval_low(gf, dlam, x_inv)
            if denom == 0:
                raise RsUncorrectable("degenerate error evaluator")
            mag = gf.div(_poly_eval_low(gf, omega, x_inv), denom)
            mag = gf.mul(mag, gf.pow(x, 1 - self.fcr))
            fixed[p] ^= mag
        if any(self.syndromes(fixed)):
            raise RsUncorrectable("residual syndrome after correction")
        return fixed[: self.k], len(positions)


@lru_cache(maxsize=None)
def rs_54_34() -> ReedSolomon:
    return ReedSolomon(54, 34, 6, 0x43, 1)
