import numpy as np
import pytest

from puritydist.basis import (BasisFunction, BasisTag, ONE, chi_values,
                              phi_angle)
from puritydist.errors import DomainError, NumericalError


@pytest.mark.parametrize('tag', [t for t in BasisTag if t is not BasisTag.CHI])
def test_name_roundtrip(tag):
    g = BasisFunction(tag)
    assert BasisFunction.from_name(g.name) == g


@pytest.mark.parametrize('twice_j', [0, 1, 2, 3, 8])
def test_chi_name_roundtrip(twice_j):
    g = BasisFunction(BasisTag.CHI, twice_j)
    assert BasisFunction.from_name(g.name) == g


def test_chi_name_format():
    assert BasisFunction(BasisTag.CHI, 3).name == 'CHI_3/2'


def test_bad_names():
    with pytest.raises(DomainError):
        BasisFunction.from_name('NOPE')
    with pytest.raises(DomainError):
        BasisFunction.from_name('CHI_1/4')


def test_index_only_on_chi():
    with pytest.raises(DomainError):
        BasisFunction(BasisTag.ONE, 2)
    with pytest.raises(DomainError):
        BasisFunction(BasisTag.CHI, -1)


def test_one():
    assert np.all(ONE(np.linspace(0.3, 1, 5)) == 1)


def test_phi_angle():
    assert phi_angle(0.4) == 0
    assert phi_angle(0.5) == 0
    assert phi_angle(1.0) == pytest.approx(np.pi / 3, abs=1e-15)


def test_chi_limits():
    phi = np.linspace(0.01, 1.0, 7)
    # j = 0 and j = 1 use sin(m phi)/m -> phi at m = 0
    assert np.allclose(chi_values(0, phi), np.sin(6 * phi) / 3 - 2 * phi)
    assert np.allclose(chi_values(2, phi),
                       phi - np.sin(6 * phi) / 3 + np.sin(12 * phi) / 12)


def test_arccos_clamps_at_half():
    g = BasisFunction(BasisTag.ARCCOS_INV_SQRT_6R_MINUS_2)
    assert g(0.5) == 0
    assert g(0.5 - 1e-15) == 0


def test_outside_domain_raises():
    g = BasisFunction(BasisTag.SQRT_6R_MINUS_3)
    with pytest.raises(NumericalError):
        g(0.4)


def test_longdouble_preserved():
    g = BasisFunction(BasisTag.ATAN_SQRT_8R2_OVER_4R2_MINUS_1)
    R = np.linspace(0.5, 1, 4).astype(np.longdouble)
    assert g(R).dtype == np.longdouble
    assert np.allclose(g(R).astype(float), g(R.astype(float)), rtol=1e-15)


def test_r_basis_values():
    # r**2 = R - 1/4: at R = 1, sqrt(4r^2-1) = sqrt(2)
    R = 1.0
    assert BasisFunction(BasisTag.SQRT_4R2_MINUS_1)(R) == pytest.approx(
        np.sqrt(2))
    assert BasisFunction(BasisTag.ATAN_SQRT_8R2_OVER_4R2_MINUS_1)(R) == \
        pytest.approx(np.arctan(np.sqrt(6 / 2)))
    assert BasisFunction(BasisTag.ATAN_SQRT_2_OVER_12R2_MINUS_3)(R) == \
        pytest.approx(np.arctan(np.sqrt(2 / 6)))
