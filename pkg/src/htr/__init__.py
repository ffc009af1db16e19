"""Rank computations and certificates for 2x...x2 tensors."""

from htr.__version__ import (  # noqa
    __author__,
    __copyright__,
    __credits__,
    __email__,
    __license__,
    __maintainer__,
    __status__,
    __version__,
)
from htr.bound2222 import bound_complex, bound_real, slice_rank_profile  # noqa
from htr.certify import (  # noqa
    CertificateParams,
    extract_certificate,
    first_certificate,
    minimize,
    objective_f,
    typicality_report,
)
from htr.core import (  # noqa
    Decomposition,
    GLAction,
    QuadTensor,
    SlicePair,
    Tensor,
    reconstruct,
    reorder_modes,
    residual,
)
from htr.higher import decompose_higher, mode_group_bound  # noqa
from htr.pencil import delta, delta_profile, is_nonsingular_pair, theta  # noqa
from htr.rank222 import canonicalize_rank3, classify, decompose222  # noqa
