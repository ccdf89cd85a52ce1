import math

import pytest

from qrngkit import QrngConfig


@pytest.fixture(scope="session")
def skewed_cfg():
    """A lopsided reference setup: misaligned contexts, four unequal detectors."""
    return QrngConfig(
        theta=math.pi / 5, e0_plus=0.30, e1_plus=0.33, e0_times=0.29, e1_times=0.30
    )


@pytest.fixture(scope="session")
def aligned_cfg():
    """The ideal operating point: quarter-turn contexts, unit efficiencies."""
    return QrngConfig()
