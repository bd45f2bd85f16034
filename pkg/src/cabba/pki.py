"""Certificate PKI: CA and aircraft keypairs, key certificates, v1/v2 checks.

Public keys are 256 bits and signatures 512 bits raw, which is what the frame
layouts budget for.  The default scheme is Ed25519 (deterministic signatures,
32-byte keys, 64-byte ``R || S`` signatures).  The certificate signature covers
``icao || K_pub`` so a certified key cannot be replayed under another address.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

PUBLIC_KEY_BYTES = 32
SIGNATURE_BYTES = 64


class SignatureScheme:
    public_key_len_bits = 8 * PUBLIC_KEY_BYTES
    signature_len_bits = 8 * SIGNATURE_BYTES
    name = "abstract"

    def public_key(self, private: bytes) -> bytes:
        raise NotImplementedError

    def sign(self, private: bytes, message: bytes) -> bytes:
        raise NotImplementedError

    def verify(self, public: bytes, signature: bytes, message: bytes) -> bool:
        raise NotImplementedError


class Ed25519Scheme(SignatureScheme):
    name = "ed25519"

    def public_key(self, private: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(private).public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw)

    def sign(self, private: bytes, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(private).sign(message)

    def verify(self, public: bytes, signature: bytes, message: bytes) -> bool:
        if len(public) != PUBLIC_KEY_BYTES or len(signature) != SIGNATURE_BYTES:
            return False
        try:
            Ed25519PublicKey.from_public_bytes(public).verify(signature, message)
        except (InvalidSignature, ValueError):
            return False
        return True


class KeyedHashScheme(SignatureScheme):
    """Size-compatible stand-in with no security: anyone can forge.

    Only meant for fast, fully reproducible simulations.
    """

    name = "keyed-hash-mock"

    def public_key(self, private: bytes) -> bytes:
        return hashlib.sha256(b"mock-pub" + private).digest()

    def sign(self, private: bytes, message: bytes) -> bytes:
        return hashlib.sha512(self.public_key(private) + message).digest()

    def verify(self, public: bytes, signature: bytes, message: bytes) -> bool:
        return signature == hashlib.sha512(public + message).digest()


ED25519 = Ed25519Scheme()


def _seed_to_private(seed: bytes) -> bytes:
    return hashlib.sha256(b"cabba-keypair" + seed).digest()


def _cert_message(icao: int, public_key: bytes) -> bytes:
    return icao.to_bytes(3, "big") + public_key


@dataclass(frozen=True)
class CertAuthority:
    private: bytes = field(repr=False)
    public: bytes
    scheme: SignatureScheme = field(default=ED25519, repr=False, compare=False)

    @classmethod
    def from_seed(cls, seed: bytes, scheme: SignatureScheme = ED25519) -> CertAuthority:
        private = _seed_to_private(seed)
        return cls(private, scheme.public_key(private), scheme)


@dataclass(frozen=True)
class AircraftIdentity:
    icao: int
    public: bytes
    cert_signature: bytes
    private: bytes | None = field(default=None, repr=False)
    scheme: SignatureScheme = field(default=ED25519, repr=False, compare=False)

    def to_record(self) -> dict:
        """Public record; the private key is never included."""
        return {"icao": f"{self.icao:06x}", "public_key": self.public.hex(),
                "certificate": self.cert_signature.hex(), "scheme": self.scheme.name}

    def dumps(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def from_record(cls, record: dict, scheme: SignatureScheme = ED25519) -> AircraftIdentity:
        return cls(int(record["icao"], 16), bytes.fromhex(record["public_key"]),
                   bytes.fromhex(record["certificate"]), None, scheme)


def issue_certificate(ca: CertAuthority, icao: int, public_key: bytes,
                      private_key: bytes | None = None) -> AircraftIdentity:
    if len(public_key) != PUBLIC_KEY_BYTES:
        raise ValueError("public key must be 256 bits")
    sig = ca.scheme.sign(ca.private, _cert_message(icao, public_key))
    return AircraftIdentity(icao, public_key, sig, private_key, ca.scheme)


def new_aircraft(ca: CertAuthority, icao: int, seed: bytes) -> AircraftIdentity:
    private = _seed_to_private(seed)
    return issue_certificate(ca, icao, ca.scheme.public_key(private), private)


def sign_interval_key(identity: AircraftIdentity, interval_key: bytes) -> bytes:
    if identity.private is None:
        raise ValueError("identity has no private key")
    return identity.scheme.sign(identity.private, interval_key)


def verify_identity(ca_public: bytes, signature: bytes, public_key: bytes, icao: int,
                    scheme: SignatureScheme = ED25519) -> bool:
    """v1: the CA signed this aircraft key for this ICAO address."""
    return scheme.verify(ca_public, signature, _cert_message(icao, public_key))


def verify_interval_key(public_key: bytes, signature: bytes, interval_key: bytes,
                        scheme: SignatureScheme = ED25519) -> bool:
    """v2: the aircraft key signed this interval key."""
    return scheme.verify(public_key, signature, interval_key)
