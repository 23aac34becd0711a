"""Multiparty quantum data hiding: states, measurements, schemes and attacks."""

from .linalg import ContractViolation, DimensionError, hermitian_eig, partial_trace, trace_norm
from .states import (
    DensityOperator,
    Partition,
    PureState,
    SystemLayout,
    fidelity,
    reduced_state,
    trace_distance,
)
from .measurement import KrausInstrument, Povm, apply_instrument, make_rng, sample, validate
from .protocol import (
    EncodingScheme,
    Subprotocol,
    authorized_decode,
    build_scheme,
    decode,
    ensemble_state,
    parallel_blocks,
    reveal,
    verify_burn,
    verify_hiding,
)
from .upb import ProductStateSet, check_orthogonality, check_unextendible
from .fiveparty import five_party_scheme, upb_family
from .security import (
    AttackModel,
    BinaryChannel,
    divincenzo_bound,
    guessing_channel,
    helstrom,
    optimize_local_attack,
    xor_amplify,
)

__version__ = "0.1.0"
