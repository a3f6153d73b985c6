"""Spectra of weighted singular integral operators on singular measures."""

import json as _json

from ._core import (  # noqa: F401
    KernelSpec,
    MeasureKind,
    NumericalError,
    PowerFitResult,
    SingularMeasure,
    Spectrum,
    ValidationError,
    add_lower_order,
    apply_exp_multiplier,
    assemble,
    circle_fourier_coefficient,
    counting,
    fiber_symbol_constant,
    fit_power_law,
    fit_spectrum,
    hermitian_eigen,
    log_kernel,
    make_cantor,
    make_circle,
    make_graph,
    make_lebesgue_cube,
    riesz_kernel,
    riesz_symbol_constant,
    sigma_weyl,
    singular_values,
)
from . import _core


def measure_class_report(measure, alpha_test=None, interior_only=False):
    return _json.loads(_core.measure_class_report_json(measure, alpha_test, interior_only))


def exponent_table(N, alpha, l, gamma1):
    return _json.loads(_core.exponent_table_json(N, alpha, l, gamma1))


def weyl_coefficient(measure, kernel, normalization="canonical"):
    return _json.loads(_core.weyl_coefficient_json(measure, kernel, normalization))


def circle_oracle(theta, n_max, log=False):
    return _json.loads(_core.circle_oracle_json(theta, n_max, log))


def run_experiment(config):
    """Runs the full pipeline for a config dict and returns the report dict."""
    return _json.loads(_core.run_experiment_json(_json.dumps(config)))


def verify(report):
    """Returns (exit_code, text) for a report dict."""
    return _core.verify_json(_json.dumps(report))


def deterministic_part(report):
    return _json.loads(_core.deterministic_part_json(_json.dumps(report)))
