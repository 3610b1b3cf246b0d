"""iwlab: exact-arithmetic lab for group-ring algebra, Fitting ideals,
truncated Iwasawa algebras and synthetic Euler-system towers."""

from .rings import (
    NonUnitError,
    OrderDivisibleByP,
    RingElem,
    TruncatedLocalRing,
    extend_scalars,
    inv_unit,
    reduce_precision,
    ring_arith,
    roots_of_unity,
    valuation,
)
from .groups import (
    Character,
    FinAbGroup,
    GroupRingElem,
    RingMap,
    augmentation_ideal_gens,
    character_collapse_map,
    eval_map,
    group_quotient_map,
    howell_solve,
    idempotent,
    kolyvagin_D,
    norm_element,
    precision_map,
    sn_apply,
)
from .modules import (
    BidualData,
    FPModule,
    HomModule,
    IdealGens,
    UnderlyingNotFree,
    base_change,
    bidual_cap,
    bidual_reduction_check,
    extend_functional,
    fitting_ideal,
    hom_module,
    pad_presentation,
    quotient_by,
    xi_is_injective,
    xi_is_isomorphism,
)
from .iwasawa import (
    ElementaryModule,
    HeightOnePrime,
    HeightNotCertified,
    NonDistinguished,
    NonUnimodular,
    Poly1,
    Poly2,
    PolyIdeal,
    PrecisionExhausted,
    ZeroIdealError,
    elementary_fitting,
    equivalent,
    find_good_specialization,
    ideal_gcd,
    precedes,
    slope_check,
    specialize,
    valuation_at_prime,
    weierstrass_divide,
)
from .euler import (
    AxiomReport,
    DerivedKappa,
    EulerInstance,
    InadmissiblePrime,
    InvarianceFailure,
    PreimageInconsistent,
    PrimeSpec,
    TowerSpec,
    c_ideal,
    check_axioms,
    check_telescoping,
    derive,
    extend_instance,
    generate_universal,
    incident_edges,
    kappa_ideal,
    lift_functional_down,
    lift_functional_up,
    reduce_tower,
    reduced_twisted_instance,
    specialization_compat_check,
    well_ordered,
)

__version__ = "0.1.0"
