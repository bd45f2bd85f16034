import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cabba.errors import RsUncorrectable
from cabba.rs import GaloisField, ReedSolomon, rs_54_34

reedsolo = pytest.importorskip("reedsolo")

symbols = st.lists(st.integers(0, 63), min_size=34, max_size=34)


@pytest.fixture(scope="module")
def oracle():
    return reedsolo.RSCodec(nsym=20, nsize=63, c_exp=6, prim=0x43, fcr=1, generator=2)


def _corrupt(codeword, positions, values):
    out = list(codeword)
    for p, v in zip(positions, values):
        out[p] ^= v
    return out


class TestField:
    def test_primitive(self):
        gf = GaloisField(6, 0x43)
        seen = {gf.pow(2, e) for e in range(63)}
        assert seen == set(range(1, 64))

    def test_inverse(self):
        gf = GaloisField()
        for a in range(1, 64):
            assert gf.mul(a, gf.inv(a)) == 1

    def test_rejects_non_primitive(self):
        with pytest.raises(ValueError):
            GaloisField(6, 0x41)


class TestCode:
    def test_parameters(self):
        rs = rs_54_34()
        assert (rs.n, rs.k) == (54, 34)
        assert (rs.n - rs.k) * 6 == 120
        assert rs.correctable == 10

    @given(symbols)
    @settings(max_examples=100, deadline=None)
    def test_matches_reedsolo(self, oracle, msg):
        ours = rs_54_34().encode(msg)
        theirs = list(oracle.encode(bytearray(msg)))
        assert ours == theirs
        assert ours[:34] == msg

    def test_clean_syndromes_zero(self):
        cw = rs_54_34().encode(list(range(34)))
        assert not any(rs_54_34().syndromes(cw))
        assert rs_54_34().decode(cw) == (list(range(34)), 0)

    @given(symbols, st.data())
    @settings(max_examples=150, deadline=None)
    def test_corrects_up_to_ten(self, msg, data):
        rs = rs_54_34()
        cw = rs.encode(msg)
        n_err = data.draw(st.integers(0, 10))
        pos = data.draw(st.lists(st.integers(0, 53), min_size=n_err, max_size=n_err, unique=True))
        val = data.draw(st.lists(st.integers(1, 63), min_size=n_err, max_size=n_err))
        decoded, fixed = rs.decode(_corrupt(cw, pos, val))
        assert decoded == msg
        assert fixed == n_err

    def test_eleven_never_silently_returns_original(self):
        rs = rs_54_34()
        rng = np.random.default_rng(7)
        raised = 0
        for _ in range(200):
            msg = rng.integers(0, 64, 34).tolist()
            pos = rng.choice(54, 11, replace=False).tolist()
            bad = _corrupt(rs.encode(msg), pos, rng.integers(1, 64, 11).tolist())
            try:
                decoded, _ = rs.decode(bad)
            except RsUncorrectable:
                raised += 1
                continue
            assert decoded != msg
        assert raised > 150

    def test_agrees_with_reedsolo_decoder(self, oracle):
        rng = np.random.default_rng(3)
        rs = rs_54_34()
        for _ in range(50):
            msg = rng.integers(0, 64, 34).tolist()
            pos = rng.choice(54, 10, replace=False).tolist()
            bad = _corrupt(rs.encode(msg), pos, rng.integers(1, 64, 10).tolist())
            theirs = list(oracle.decode(bytearray(bad))[0])
            assert rs.decode(bad)[0] == theirs == msg

    def test_input_checks(self):
        rs = rs_54_34()
        with pytest.raises(ValueError):
            rs.encode([0] * 33)
        with pytest.raises(ValueError):
            rs.encode([64] + [0] * 33)
        with pytest.raises(ValueError):
            rs.decode([0] * 53)

    def test_small_code(self):
        rs = ReedSolomon(n=15, k=11, bits=4, prim=0x13)
        cw = rs.encode(list(range(11)))
        cw[3] ^= 5
        cw[9] ^= 1
        assert rs.decode(cw) == (list(range(11)), 2)
