"""p-adic character neural networks with exact training over Z/p^eZ."""

__version__ = "0.1.0"

from .characters import (
    Character,
    character_multiply,
    eval_binary,
    eval_mahler,
    eval_taylor_exp,
    evaluate,
    factorial_table,
    invert_character,
    is_injective,
    iwasawa_log,
)
from .network import (
    CharacterNetwork,
    Dataset,
    coordinate_probe,
    forward,
    net_add,
    net_multiply,
    net_scale,
    net_stack,
)
from .padic import (
    PadicContext,
    PadicResidue,
    ScaledPadic,
    mod_inverse,
    padic_norm,
    valuative_decomposition,
)
from .polysys import CompiledSystem, IntPolynomial, NetShape, compile_residual, poly_eval_mod
from .solver import (
    DdpReport,
    LossValue,
    brute_force_minimum,
    ddp_max_exponent,
    linf_training_minimum,
    train,
)
