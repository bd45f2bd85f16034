import pytest

from cabba.pki import CertAuthority
from cabba.sim import Sender
from cabba.tesla import TeslaConfig

ICAO = 0x4840D6
CHAIN = TeslaConfig(chain_length=64)


@pytest.fixture(scope="session")
def ca():
    return CertAuthority.from_seed(b"test-ca")


@pytest.fixture(scope="session")
def plane(ca):
    return Sender.create(ca, ICAO, b"plane", CHAIN)


@pytest.fixture(scope="session")
def spoofer():
    """Same ICAO, own chain and keypair, certified by a CA nobody trusts."""
    return Sender.create(CertAuthority.from_seed(b"rogue-ca"), ICAO, b"spoofer", CHAIN)
