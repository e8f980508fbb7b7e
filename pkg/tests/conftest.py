import math

import pytest

from modscatter import normalized_params


def bessel_series_oracle(n: int, x: float, terms: int = 20) -> float:
    """Independent J_n by direct power-series summation.

    Deliberately naive (factorials, fixed term count): this is the reference
    the shipped implementation is measured against, so it shares no code
    with it.
    """
    sign = 1.0
    if n < 0:
        n = -n
        sign = (-1.0) ** n
    total = 0.0
    for m in range(terms):
        term = (-1.0) ** m * (0.5 * x) ** (n + 2 * m) / (
            math.factorial(m) * math.factorial(n + m)
        )
        total += term
    return sign * total


@pytest.fixture
def params_reference():
    """The workhorse operating point: f*Omega = 5 gamma, omega = 2 gamma."""
    return normalized_params(5.0, 2.0)


@pytest.fixture
def params_static_amp():
    """Frozen modulation (omega = 0) at f*Omega = 5 gamma."""
    return normalized_params(5.0, 0.0)


@pytest.fixture
def params_unmodulated():
    return normalized_params(0.0, 2.0)
