"""Expander families from Cayley graphs, covering maps, Cheeger constants and
negative kernels on finite graphs."""

__version__ = "0.1.0"

from .constructions import (  # noqa: E402
    DisjointSet,
    ReplacementResult,
    automorphism_group,
    find_automorphism,
    fixed_vertex_parity_check,
    kpq_replace,
    vertex_transitive,
)
from .coverings import (  # noqa: E402
    CoveringMap,
    DeckGroup,
    QuotientResult,
    deck_action,
    deck_group,
    orbit_map_isomorphism,
    quotient_cover_from_reduction,
    quotient_graph,
    verify_cover,
)
from .exceptions import ConsistencyError, ResourceError, ValidationError  # noqa: E402
from .family import (  # noqa: E402
    FamilyReport,
    GraphFamily,
    analyze_family,
    build_prime_family,
    build_torus_family,
    build_tower,
    folner_injection_probe,
    load_manifest,
)
from .graph import (  # noqa: E402
    Graph,
    ball,
    boundary,
    build_graph,
    complete,
    complete_bipartite,
    cycle,
    degree_profile,
    edge_cut,
    generate,
    path,
    petersen,
    torus,
    tree_ball,
)
from .groups import (  # noqa: E402
    FiniteGroup,
    GroupAction,
    cayley_graph,
    cyclic_group,
    enumerate_group,
    left_translation_action,
    parse_group_spec,
    reduction_hom,
    sl_generators,
)
from .kernels import (  # noqa: E402
    Kernel,
    ball_roundness_trend,
    bound_certificate,
    cnd_sup_exponent,
    invariance_check,
    is_negative_kernel,
    kernel_from_metric,
    roundness_estimate,
)
from .spectra import (  # noqa: E402
    cheeger_exact,
    cheeger_heuristic,
    expander_constant,
    folner_ratio,
    spectrum,
)
