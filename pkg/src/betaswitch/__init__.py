"""First-return maps of greedy, lazy and random beta-transformations to the
switch region S = [1/beta, 1/(beta(beta-1))]."""

from .classify import (MarkerKind, MVerdict, Regime, check_crossover, check_hop,
                       classify_beta, hop_index, m_membership, marker, multinacci)
from .dynamics import (BetaCtx, OmegaSource, Region, apply_digit, classify_point,
                       forced_orbit, greedy_step, kbeta_step, lazy_step, reflect)
from .errors import (BetaSwitchError, CapExceeded, DivisionBySignUnknown, KMaxExceeded,
                     MultipleRoots, NoReturnWithinCap, NoSignChange, NotAGlst, OutOfDomain,
                     UnresolvableAtPrecision)
from .glst import (GlstReport, LurothDigits, birkhoff_average, expected_return_time,
                   glst_verify, luroth_classic)
from .numeric import CertReal, Enclosure, Ordering, format_decimal, isolate_root, precision
from .realizability import (RealizationTree, certify_impossible_constant,
                            realize_exists_omega, realize_fixed_omega)
from .return_map import (Branch, Itv, MapWord, ReturnRecord, enumerate_branches,
                         first_return, graph_samples, min_return_time, return_sequence)

__version__ = "0.1.0"
