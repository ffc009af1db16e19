"""Example tensors, random generators and the Monte Carlo harness."""

import logging

import numpy as np

from htr.__version__ import __version__
from htr.bound2222 import bound_complex, bound_real
from htr.certify import CertificateParams, moment_matrix, typicality_report
from htr.core import (
    Decomposition,
    QuadTensor,
    SlicePair,
    Tensor,
    quad_unfolding_matrix,
)
from htr.exceptions import ConstructionFailure, PreconditionError
from htr.higher import decompose_higher
from htr.rank222 import classify
from htr.util import RESIDUAL_RTOL, TOLERANCES, validate_field

LOGGER = logging.getLogger(__name__)

E = np.eye(2)
S = np.array([[0.0, 1.0], [0.0, 0.0]])
R = np.array([[0.0, 1.0], [-1.0, 0.0]])

SAMPLE_ORDERS = (3, 4, 5, 6)
MIN_MOMENT_DETERMINANT = 0.1

COMMON_COLUMNS = ["index", "order", "field", "seed", "version", "tolerances"]
CSV_COLUMNS = {
    3: COMMON_COLUMNS + ["delta", "delta_sign", "rank"],
    4: COMMON_COLUMNS + ["terms", "branch", "residual", "min_f", "conclusion"],
    5: COMMON_COLUMNS + ["terms", "bound", "residual"],
    6: COMMON_COLUMNS + ["terms", "bound", "residual"],
}


def example_tensor_x():
    """Real 2x2x2x2 tensor whose slice pairs keep rank 3 under every action."""
    return QuadTensor(
        E.copy(),
        np.array([[0.0, -1.0], [1.0, 0.0]]),
        np.array([[0.0, 2.0], [-1.0, 0.0]]),
        np.diag([1.0, 2.0]),
    )


EXAMPLES = {
    "x": example_tensor_x,
    "es": lambda: SlicePair(E.copy(), S.copy()),
    "er": lambda: SlicePair(E.copy(), R.copy()),
    "ediag": lambda: SlicePair(E.copy(), np.diag([1.0, 2.0])),
}


def example(name):
    """Named example as a :class:`htr.core.Tensor`."""
    return EXAMPLES[name]().to_tensor()


def random_tensor(order, field="real", rng=None):
    """Gaussian tensor; complex entries are ``(x + iy) / sqrt(2)``."""
    validate_field(field)
    rng = rng if rng is not None else np.random.default_rng()
    shape = (2,) * order
    if field == "complex":
        real, imaginary = rng.standard_normal(shape), rng.standard_normal(shape)
        data = (real + 1j * imaginary) / np.sqrt(2)
    else:
        data = rng.standard_normal(shape)
    return Tensor(data, field=field)


def random_rank_one_sum(order, count, field="real", rng=None):
    """Sum of ``count`` random rank-one terms with the terms that built it."""
    validate_field(field)
    rng = rng if rng is not None else np.random.default_rng()
    vector_lists = []
    for _ in range(count):
        if field == "complex":
            vectors = rng.standard_normal((order, 2)) + 1j * rng.standard_normal(
                (order, 2)
            )
        else:
            vectors = rng.standard_normal((order, 2))
        vector_lists.append(list(vectors))
    decomposition = Decomposition(vector_lists, order)
    if count == 0:
        return Tensor(np.zeros((2,) * order), field=field), decomposition
    return Tensor(decomposition.reconstruct_data(), field=field), decomposition


def synthetic_rank4(rng=None):
    """Real tensor ``sum_m A_m (x) c_m (x) d_m`` with rank-one ``A_m``.

    :returns: Tensor, the generating parameters and the rank-one factors.
    :rtype: tuple

    """
    rng = rng if rng is not None else np.random.default_rng()
    while True:
        params = CertificateParams(
            rng.uniform(-1, 1, (2, 4)), rng.uniform(-1, 1, (2, 4))
        )
        if abs(np.linalg.det(moment_matrix(params))) <= MIN_MOMENT_DETERMINANT:
            continue
        left = rng.standard_normal((4, 2))
        right = rng.standard_normal((4, 2))
        factors = np.einsum("mi,mj->mij", left, right)
        data = np.einsum("mij,km,lm->ijkl", factors, params.c, params.d)
        quad = QuadTensor.from_tensor(Tensor(data))
        if abs(quad_unfolding_matrix(quad).determinant) > 1e-6:
            return quad, params, factors


def _tensor_generator(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _tolerance_string():
    return ";".join(
        "{}={}".format(key, value) for key, value in sorted(TOLERANCES.items())
    )


def _order3_row(tensor, field):
    report = classify(SlicePair.from_tensor(tensor), field)
    value = report.delta.value
    return {
        "delta": "{:.12g}".format(value.real if field == "real" else abs(value)),
        "delta_sign": report.delta.sign,
        "rank": report.rank,
    }


def _order4_row(tensor, field, seed, restarts, rng):
    quad = QuadTensor.from_tensor(tensor)
    result = bound_complex(quad, rng) if field == "complex" else bound_real(quad, rng)
    row = {
        "terms": result.terms,
        "branch": result.branch,
        "residual": "{:.3e}".format(result.decomposition.residual(tensor)),
        "min_f": "",
        "conclusion": "",
    }
    if field == "real" and restarts:
        try:
            report = typicality_report(quad, {"restarts": restarts, "seed": seed})
        except PreconditionError as exception:
            LOGGER.warning("Certificate search skipped: %s", exception)
        else:
            row["min_f"] = "{:.6g}".format(report.min_f)
            row["conclusion"] = report.conclusion
    return row


def _higher_row(tensor, field, rng):
    result = decompose_higher(tensor, field, rng)
    return {
        "terms": result.terms,
        "bound": result.bound,
        "residual": "{:.3e}".format(result.decomposition.residual(tensor)),
    }


def sample_outcomes(order, count, seed=0, field="real", restarts=0):
    """Per-tensor outcomes for ``count`` Gaussian tensors of the given order.

    Tensor ``i`` is drawn from a generator seeded by ``(seed, i)``, so rows
    are reproducible one by one.

    :param order: 3, 4, 5 or 6.
    :type order: int
    :param count: Number of tensors.
    :type count: int
    :param seed: Root seed.
    :type seed: int
    :param field: ``real`` or ``complex``.
    :type field: str
    :param restarts: Certificate search restarts for order 4 (0 skips the search).
    :type restarts: int
    :returns: Rows keyed by :data:`CSV_COLUMNS`.
    :rtype: list of dict

    """
    if order not in SAMPLE_ORDERS:
        raise PreconditionError(
            "Sampling supports orders {}: {}".format(SAMPLE_ORDERS, order)
        )
    if count < 1:
        raise PreconditionError("Sample count must be positive: {}".format(count))
    validate_field(field)

    rows = []
    for index in range(count):
        rng = _tensor_generator(seed, index)
        tensor = random_tensor(order, field, rng)
        row = {
            "index": index,
            "order": order,
            "field": field,
            "seed": seed,
            "version": __version__,
            "tolerances": _tolerance_string(),
        }
        try:
            if order == 3:
                row.update(_order3_row(tensor, field))
            elif order == 4:
                row.update(_order4_row(tensor, field, seed, restarts, rng))
            else:
                row.update(_higher_row(tensor, field, rng))
        except ConstructionFailure as exception:
            LOGGER.warning("Sample %d failed: %s", index, exception)
            continue
        LOGGER.debug("Sample %d: %s", index, row)
        rows.append(row)
    return rows


def within_tolerance(decomposition, tensor):
    """Check the reconstruction contract ``residual <= 1e-8 * ||T||``."""
    return decomposition.residual(tensor) <= RESIDUAL_RTOL * max(1.0, tensor.norm())
