import math
from itertools import product

import numpy as np
import pytest

from bosonqec.channels import apply_loss_pattern, enumerate_loss_patterns
from bosonqec.codes import CodeSpec, logical_basis
from bosonqec.kl import (
    analytic_alpha,
    analytic_diagonal,
    default_gamma_grid,
    diagonal_deviation,
    fit_residual_scaling,
    hermiticity_deviation,
    kl_matrix,
)

GRID = default_gamma_grid()


def test_offdiag_and_cross_vanish_exactly():
    # damaged supports stay disjoint across labels and across patterns
    for family in ("extended_binomial", "ce_extended_binomial"):
        for w, k in [(1, 1), (1, 2), (2, 1), (2, 2)]:
            basis = logical_basis(CodeSpec(family, w, k))
            for gamma in (1e-3, 1e-2):
                report = kl_matrix(basis, gamma)
                assert report.offdiag_max < 1e-13
                assert report.cross_max < 1e-13


def test_gamma_zero_entries_are_kronecker():
    basis = logical_basis(CodeSpec("extended_binomial", 1, 1))
    report = kl_matrix(basis, 0.0)
    zero_pattern = (0, 0)
    for (i, j, kpat, lpat), value in report.entries.items():
        expected = 1.0 if (i == j and kpat == lpat == zero_pattern) else 0.0
        assert abs(value - expected) < 1e-14


def test_diagonal_deviation_closed_form_w1k1():
    # symbolic oracle for the no-loss pattern:
    # <0|..|0> = (1 + (1-g)^4)/2 and <1|..|1> = (1-g)^2, so the gap is
    # (1 + (1-g)^4)/2 - (1-g)^2 = (2g - g^2)^2 / 2
    basis = logical_basis(CodeSpec("extended_binomial", 1, 1))
    for gamma in (1e-3, 1e-2):
        expected = (2 * gamma - gamma**2) ** 2 / 2
        assert abs(diagonal_deviation(basis, gamma, pattern=(0, 0)) - expected) < 1e-13
        # the no-loss pattern dominates, so the max matches the closed form
        assert abs(diagonal_deviation(basis, gamma) - expected) < 1e-13


def test_diagonal_deviation_single_loss_w1k1():
    # same symbolic oracle for one loss on mode 0: the diagonal overlap is
    # g(1-g)^3 for label 0 and g(1-g) for label 1, an order-g^2 gap
    basis = logical_basis(CodeSpec("extended_binomial", 1, 1))
    for gamma in (1e-3, 1e-2):
        expected = gamma * (1 - gamma) - gamma * (1 - gamma) ** 3
        assert abs(diagonal_deviation(basis, gamma, pattern=(1, 0)) - expected) < 1e-15


def test_diagonal_deviation_zero_at_gamma_zero():
    basis = logical_basis(CodeSpec("extended_binomial", 2, 1))
    assert diagonal_deviation(basis, 0.0) == 0.0


def test_analytic_alpha_values():
    gamma = 0.2
    assert abs(analytic_alpha(2, 1, gamma) - 2 * gamma * (1 - gamma)) < 1e-15
    for n in range(5):
        assert abs(analytic_alpha(n, 0, gamma) - (1 - gamma) ** n) < 1e-15
    assert analytic_alpha(1, 2, gamma) == 0.0


def test_analytic_matches_numeric_diagonal():
    for w, k in product((1, 2), (1, 2)):
        basis = logical_basis(CodeSpec("extended_binomial", w, k))
        spec = basis.spec
        for gamma in (1e-3, 5e-3):
            for a in enumerate_loss_patterns(spec.num_modes, w):
                for label, cw in basis.codewords.items():
                    numeric = apply_loss_pattern(cw, a, gamma).norm_squared()
                    assert abs(numeric - analytic_diagonal(cw, a, gamma)) < 1e-13


def test_entries_hermitian():
    basis = logical_basis(CodeSpec("extended_binomial", 1, 2))
    report = kl_matrix(basis, 7e-3)
    assert hermiticity_deviation(report) < 1e-14


def test_fit_slope_w1():
    basis = logical_basis(CodeSpec("extended_binomial", 1, 1))
    fit = fit_residual_scaling(basis, GRID)
    assert fit.valid and fit.n_used == len(GRID)
    assert abs(fit.slope - 2.0) <= 0.05


def test_fit_slope_w1_k2():
    basis = logical_basis(CodeSpec("extended_binomial", 1, 2))
    fit = fit_residual_scaling(basis, GRID)
    assert fit.valid
    assert fit.slope >= 2.0 - 0.15


def test_fit_slope_w2():
    basis = logical_basis(CodeSpec("extended_binomial", 2, 1))
    fit = fit_residual_scaling(basis, GRID)
    assert fit.valid
    assert fit.slope >= 2.85


def test_fit_grid_validation():
    basis = logical_basis(CodeSpec("extended_binomial", 1, 1))
    with pytest.raises(ValueError):
        fit_residual_scaling(basis, (1e-3, 2e-3, 3e-3))  # too few points
    with pytest.raises(ValueError):
        fit_residual_scaling(basis, (1e-3, 2e-3, 3e-3, 4e-3, 0.2))  # out of range
    with pytest.raises(ValueError):
        fit_residual_scaling(basis, (1e-3, 1e-3, 2e-3, 3e-3, 4e-3))  # not increasing


def test_fit_flags_degenerate_residuals():
    # residuals of order gamma^2 sit below the zero floor for a grid this
    # small, so every point is excluded and the fit is flagged invalid
    basis = logical_basis(CodeSpec("extended_binomial", 1, 1))
    tiny = tuple(float(g) for g in np.geomspace(1e-9, 1e-8, 5))
    fit = fit_residual_scaling(basis, tiny)
    assert not fit.valid
    assert fit.n_used == 0
    assert math.isnan(fit.slope)


def test_kl_report_summary_nonnegative():
    basis = logical_basis(CodeSpec("ce_extended_binomial", 1, 1))
    report = kl_matrix(basis, 4e-3)
    assert report.offdiag_max >= 0.0
    assert report.cross_max >= 0.0
    assert report.diag_deviation >= 0.0
