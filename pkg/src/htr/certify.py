"""Rank-4 certificates for real 2x2x2x2 tensors.

A real 2x2x2x2 tensor ``T`` with linearly independent blocks has rank 4
exactly when there are vectors ``c_k``, ``d_k`` (``k = 1..4``) with an
invertible moment matrix ``M`` such that every column of ``B M^-1`` is the
vectorization of a rank-one matrix, ``B`` being the block unfolding of
``T``. The normalized sum of squared determinants of those columns is the
objective ``f`` minimized here from many random starts.

"""

import logging
from collections import Counter, namedtuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from more_itertools import chunked
from scipy import optimize

from htr.core import (
    Decomposition,
    QuadTensor,
    as_tensor,
    quad_unfolding_matrix,
    unvec2x2,
)
from htr.exceptions import PreconditionError, SingularMatrixError, UnknownMethod
from htr.util import (
    DEFAULT_CONFIG,
    METHODS,
    SINGULAR_M_RTOL,
    validate_method,
    validate_restarts,
)

LOGGER = logging.getLogger(__name__)

PARAMETER_COUNT = 16
CHUNK_SIZE = 25

NELDER_MEAD_OPTIONS = {
    "xatol": 1e-10,
    "fatol": 1e-16,
    "maxiter": 20000,
    "maxfev": 20000,
    "adaptive": True,
}
BFGS_OPTIONS = {"gtol": 1e-12, "maxiter": 1000}
# Local searches treat worse-conditioned moment matrices as outside the domain
MAX_MOMENT_CONDITION = 1e8

EVIDENCE_NOTE = (
    "rank5-candidate is numerical evidence only: the infimum of f may be "
    "positive without being attained, or lower than every local minimum found."
)


class CertificateParams(namedtuple("CertificateParams", ["c", "d"])):
    """The vectors ``c_k`` and ``d_k`` as the columns of two 2x4 arrays."""

    __slots__ = ()

    def __new__(cls, c, d):
        c = np.array(c, dtype=float)
        d = np.array(d, dtype=float)
        if c.shape != (2, 4) or d.shape != (2, 4):
            raise PreconditionError("Certificate parameters must be 2x4 arrays")
        return super(CertificateParams, cls).__new__(cls, c, d)

    @classmethod
    def identity(cls):
        """Parameters whose moment matrix is the identity."""
        return cls([[1, 1, 0, 0], [0, 0, 1, 1]], [[1, 0, 1, 0], [0, 1, 0, 1]])

    @classmethod
    def from_vector(cls, vector):
        """Read ``[c_1., c_2., d_1., d_2.]`` (16 values)."""
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (PARAMETER_COUNT,):
            raise PreconditionError(
                "Expected 16 parameters, got {}".format(vector.shape)
            )
        return cls(vector[:8].reshape(2, 4), vector[8:].reshape(2, 4))

    def to_vector(self):
        return np.concatenate([self.c.ravel(), self.d.ravel()])

    def to_dict(self):
        return {"c": self.c.tolist(), "d": self.d.tolist()}


FactorMatrix = namedtuple("FactorMatrix", ["matrix", "defects"])
ConditionResiduals = namedtuple("ConditionResiduals", ["residuals", "determinant"])
Certificate = namedtuple("Certificate", ["accepted", "decomposition", "residual"])


class MinimizeResult(
    namedtuple(
        "MinimizeResult",
        ["best_params", "best_value", "local_minima", "histogram", "minimizers"],
    )
):
    """Multistart outcome; restart ``i`` ends at ``minimizers[i]``."""

    __slots__ = ()

    def ranked(self):
        """Pairs ``(value, params)`` in ascending order of value."""
        order = np.argsort(self.local_minima, kind="stable")
        return [(self.local_minima[index], self.minimizers[index]) for index in order]


class EvidenceReport(
    namedtuple(
        "EvidenceReport",
        [
            "tensor",
            "restarts",
            "seed",
            "method",
            "min_f",
            "conclusion",
            "residual",
            "histogram",
            "decomposition",
        ],
    )
):
    """Outcome of a multistart certificate search."""

    __slots__ = ()

    note = EVIDENCE_NOTE

    def to_dict(self):
        document = {
            "tensor": self.tensor,
            "seed": self.seed,
            "restarts": self.restarts,
            "method": self.method,
            "min_f": self.min_f,
            "conclusion": self.conclusion,
            "residual": self.residual,
            "local_minima_histogram": self.histogram,
            "note": self.note,
        }
        if self.decomposition is not None:
            document["decomposition"] = self.decomposition.to_dict()
        return document


def _moment(c, d):
    return np.stack([c[0] * d[0], c[0] * d[1], c[1] * d[0], c[1] * d[1]], axis=1)


def moment_matrix(params):
    """4x4 matrix with row ``k`` equal to ``(c1k d1k, c1k d2k, c2k d1k, c2k d2k)``."""
    return _moment(params.c, params.d)


def moment_tolerance(matrix):
    """``1e-10 * ||M||_F**4``, below which ``det(M)`` counts as zero."""
    return SINGULAR_M_RTOL * np.linalg.norm(matrix) ** 4


def _unfolding(quad):
    if not isinstance(quad, QuadTensor):
        quad = QuadTensor.from_tensor(as_tensor(quad, order=4))
    if quad.field == "complex":
        raise PreconditionError("Certificates are defined for real tensors")
    return quad_unfolding_matrix(quad).matrix


def _check_moment(matrix):
    determinant = np.linalg.det(matrix)
    if not abs(determinant) > moment_tolerance(matrix):
        raise SingularMatrixError(
            "Moment matrix is singular: det(M)={:.3g}".format(determinant)
        )
    return determinant


def _defects(factors):
    return factors[0] * factors[3] - factors[1] * factors[2]


def recovered_factors(quad, params):
    """Columns ``vec(A_k)`` of ``N = B M^-1`` and their determinants.

    :raises SingularMatrixError: when ``|det M|`` is within tolerance of zero.
    :rtype: FactorMatrix

    """
    unfolding = _unfolding(quad)
    matrix = moment_matrix(params)
    _check_moment(matrix)
    factors = np.linalg.solve(matrix.T, unfolding.T).T
    return FactorMatrix(factors, _defects(factors))


def _ratio(factors):
    defects = _defects(factors)
    denominator = np.sum(factors ** 2)
    return np.sum(defects ** 2) / denominator ** 2


def objective_f(quad, params):
    """Sum of squared column determinants of ``N`` over ``(sum of squares of N)**2``.

    :raises SingularMatrixError: when ``|det M|`` is within tolerance of zero.

    """
    factors = recovered_factors(quad, params).matrix
    if not np.any(factors):
        raise PreconditionError("Objective is undefined for the zero tensor")
    return float(_ratio(factors))


def _objective_gradient(factors, matrix):
    defects = _defects(factors)
    numerator = np.sum(defects ** 2)
    denominator = np.sum(factors ** 2)
    numerator_gradient = 2 * np.stack(
        [
            defects * factors[3],
            -defects * factors[2],
            -defects * factors[1],
            defects * factors[0],
        ]
    )
    factor_gradient = (
        numerator_gradient / denominator**2
        - 4 * numerator * factors / denominator**3
    )
    return np.linalg.solve(matrix, -factor_gradient.T.dot(factors)).T


def objective_gradient(quad, params):
    """Closed-form gradient of :func:`objective_f` in the 16-parameter layout."""
    factors = recovered_factors(quad, params).matrix
    return _parameter_gradient(
        _objective_gradient(factors, moment_matrix(params)), params.c, params.d
    )


def _parameter_gradient(moment_gradient, c, d):
    h = moment_gradient
    gc = np.stack([h[:, 0] * d[0] + h[:, 1] * d[1], h[:, 2] * d[0] + h[:, 3] * d[1]])
    gd = np.stack([h[:, 0] * c[0] + h[:, 2] * c[1], h[:, 1] * c[0] + h[:, 3] * c[1]])
    return np.concatenate([gc.ravel(), gd.ravel()])


def _searchable(matrix):
    if not abs(np.linalg.det(matrix)) > moment_tolerance(matrix):
        return False
    return np.linalg.cond(matrix) < MAX_MOMENT_CONDITION


def _barrier_objective(vector, unfolding):
    c = vector[:8].reshape(2, 4)
    d = vector[8:].reshape(2, 4)
    matrix = _moment(c, d)
    if not _searchable(matrix):
        return np.inf
    factors = np.linalg.solve(matrix.T, unfolding.T).T
    return float(_ratio(factors))


def _barrier_gradient(vector, unfolding):
    c = vector[:8].reshape(2, 4)
    d = vector[8:].reshape(2, 4)
    matrix = _moment(c, d)
    if not _searchable(matrix):
        return np.zeros(PARAMETER_COUNT)
    factors = np.linalg.solve(matrix.T, unfolding.T).T
    return _parameter_gradient(_objective_gradient(factors, matrix), c, d)


def condition_E_raw(quad, params):
    """Determinant-product form of the rank-4 conditions.

    For each ``k`` with ``D_k(w)`` the determinant of ``M`` with row ``k``
    replaced by ``w``, the value is ``D_k(b_1) D_k(b_4) - D_k(b_2) D_k(b_3)``
    over the rows ``b_r`` of the block unfolding.

    """
    unfolding = _unfolding(quad)
    matrix = moment_matrix(params)
    residuals = []
    for k in range(4):

        def replaced(row):
            copy = matrix.copy()
            copy[k] = unfolding[row]
            return np.linalg.det(copy)

        residuals.append(replaced(0) * replaced(3) - replaced(1) * replaced(2))
    return np.array(residuals)


def condition_E_residuals(quad, params):
    """``det(M)**2 det(A_k)`` for the four recovered factors, with ``det(M)``.

    Falls back on :func:`condition_E_raw` when ``M`` is singular.

    :rtype: ConditionResiduals

    """
    matrix = moment_matrix(params)
    determinant = np.linalg.det(matrix)
    try:
        defects = recovered_factors(quad, params).defects
    except SingularMatrixError:
        return ConditionResiduals(condition_E_raw(quad, params), determinant)
    return ConditionResiduals(determinant ** 2 * defects, determinant)


def _restart_generator(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _random_start(rng):
    while True:
        vector = rng.uniform(-1, 1, PARAMETER_COUNT)
        matrix = _moment(vector[:8].reshape(2, 4), vector[8:].reshape(2, 4))
        if abs(np.linalg.det(matrix)) > moment_tolerance(matrix):
            return vector


def local_minimize(unfolding, start, method):
    """One local search from ``start``; returns the final value and parameters."""
    with np.errstate(all="ignore"):
        if method == "bfgs":
            result = optimize.minimize(
                _barrier_objective,
                start,
                args=(unfolding,),
                method="BFGS",
                jac=_barrier_gradient,
                options=BFGS_OPTIONS,
            )
        else:
            result = optimize.minimize(
                _barrier_objective,
                start,
                args=(unfolding,),
                method="Nelder-Mead",
                options=NELDER_MEAD_OPTIONS,
            )
    return float(result.fun), np.asarray(result.x)


def _run_restarts(unfolding, seed, indices, method):
    outcomes = []
    for index in indices:
        start = _random_start(_restart_generator(seed, index))
        value, vector = local_minimize(unfolding, start, method)
        LOGGER.debug("Restart %d: f=%.6g", index, value)
        outcomes.append((index, value, vector))
    return outcomes


def minimize(quad, restarts, seed=0, method="nelder-mead", workers=1):
    """Multistart minimization of :func:`objective_f`.

    Every restart draws its start from a generator derived from
    ``(seed, restart index)``, so the result does not depend on ``workers``.

    :param quad: Real order-4 tensor with a nonsingular block unfolding.
    :type quad: QuadTensor
    :param restarts: Number of local searches.
    :type restarts: int
    :param seed: Root seed.
    :type seed: int
    :param method: ``nelder-mead`` or ``bfgs``.
    :type method: str
    :param workers: Worker processes; 1 runs in-process.
    :type workers: int
    :rtype: MinimizeResult

    """
    try:
        validate_method(method)
    except ValueError as exception:
        raise UnknownMethod(str(exception))
    validate_restarts(restarts)
    unfolding = _unfolding(quad)
    if not abs(np.linalg.det(unfolding)) > moment_tolerance(unfolding):
        raise PreconditionError("Block unfolding of the tensor is singular")

    if workers > 1:
        LOGGER.debug("Running %d restarts on %d workers", restarts, workers)
        chunks = [list(chunk) for chunk in chunked(range(restarts), CHUNK_SIZE)]
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(_run_restarts, unfolding, seed, chunk, method)
                for chunk in chunks
            ]
            outcomes = [outcome for future in futures for outcome in future.result()]
    else:
        outcomes = _run_restarts(unfolding, seed, range(restarts), method)

    outcomes.sort(key=lambda outcome: outcome[0])
    values = [value for _, value, _ in outcomes]
    best = int(np.argmin(values))
    histogram = Counter("{:.3f}".format(value) for value in values)
    minimizers = [CertificateParams.from_vector(vector) for _, _, vector in outcomes]
    return MinimizeResult(
        minimizers[best],
        values[best],
        values,
        dict(sorted(histogram.items())),
        minimizers,
    )


def _nearest_rank_one(matrix):
    left, singular_values, right = np.linalg.svd(matrix)
    return singular_values[0] * left[:, 0], right[0]


def extract_certificate(quad, params, tol=1e-6):
    """Four-term decomposition from the recovered factors, if it reproduces the tensor.

    Each factor is replaced by its nearest rank-one matrix; ``c_k`` sits on
    the third mode and ``d_k`` on the fourth.

    :raises SingularMatrixError: when ``|det M|`` is within tolerance of zero.
    :rtype: Certificate

    """
    tensor = as_tensor(quad)
    factors = recovered_factors(quad, params).matrix
    vector_lists = []
    for k in range(4):
        left, right = _nearest_rank_one(unvec2x2(factors[:, k]))
        vector_lists.append([left, right, params.c[:, k], params.d[:, k]])
    decomposition = Decomposition.collect(vector_lists, 4)
    residual = decomposition.residual(tensor)
    if residual <= tol * tensor.norm():
        return Certificate(True, decomposition, residual)
    LOGGER.debug("Certificate refused with residual %.3g", residual)
    return Certificate(False, None, residual)


def first_certificate(quad, result, tol=1e-6):
    """Certificate from the lowest minimizer that yields one.

    Minimizers are tried in ascending order of ``f``. When every one is
    refused the smallest residual is kept.

    :param quad: Real order-4 tensor.
    :type quad: QuadTensor
    :param result: Outcome of :func:`minimize`.
    :type result: MinimizeResult
    :rtype: Certificate

    """
    refused = Certificate(False, None, float("inf"))
    for position, (value, params) in enumerate(result.ranked()):
        try:
            certificate = extract_certificate(quad, params, tol)
        except SingularMatrixError:
            continue
        if certificate.accepted:
            LOGGER.debug("Certificate from minimizer %d (f=%.3g)", position, value)
            return certificate
        if certificate.residual < refused.residual:
            refused = certificate
    return refused


def typicality_report(quad, config=None, tensor_id=None):
    """Run the certificate search and draw a conclusion.

    :param quad: Real order-4 tensor with a nonsingular block unfolding.
    :type quad: QuadTensor
    :param config: Settings as returned by :func:`htr.util.load_config`.
    :type config: dict
    :param tensor_id: Label stored in the report.
    :type tensor_id: str
    :rtype: EvidenceReport

    """
    config = dict(DEFAULT_CONFIG, **(config or {}))
    if config["method"] not in METHODS:
        raise UnknownMethod("Unknown method: {!r}".format(config["method"]))
    result = minimize(
        quad,
        config["restarts"],
        seed=config["seed"],
        method=config["method"],
        workers=config["workers"],
    )
    certificate = first_certificate(quad, result, config["certificate_tol"])
    enough_restarts = config["restarts"] >= config["min_restarts"]
    if certificate.accepted:
        conclusion = "rank4-certified"
    elif result.best_value >= config["floor"] and enough_restarts:
        conclusion = "rank5-candidate"
    else:
        conclusion = "inconclusive"
    LOGGER.debug("Conclusion %s with min f %.6g", conclusion, result.best_value)
    return EvidenceReport(
        tensor=tensor_id,
        restarts=config["restarts"],
        seed=config["seed"],
        method=config["method"],
        min_f=result.best_value,
        conclusion=conclusion,
        residual=certificate.residual,
        histogram=result.histogram,
        decomposition=certificate.decomposition,
    )
