import math

import pytest

from bykovlab import circlemap as cm
from bykovlab.model import reference_params, reference_perturbation


@pytest.fixture(scope="session")
def pert():
    p = reference_perturbation()
    p.validate()
    return p


@pytest.fixture(scope="session")
def ref_params():
    """Reference eigenvalue data with K_omega = 3."""
    return reference_params(omega=1.0)


@pytest.fixture(scope="session")
def params_k5():
    """Reference data dialed to K_omega = 5 (non-invertible circle limit)."""
    return reference_params(omega=5.0 / 3.0)


@pytest.fixture(scope="session")
def family_k5(params_k5, pert):
    return cm.family_from_model(params_k5, pert)


@pytest.fixture(scope="session")
def family_k03(pert):
    return cm.family_from_model(reference_params(omega=0.1), pert)


@pytest.fixture(scope="session")
def cert_k5(family_k5):
    """A passing finite-horizon certificate at K_omega = 5, a = 0."""
    cert = cm.misiurewicz_check(family_k5, 0.0, delta0=0.05, horizon=50)
    assert cert.passed
    return cert
