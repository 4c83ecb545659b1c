"""steinpp: explicit Poisson(-process) approximation bounds for extremes.

Library layout:

* :mod:`steinpp.distributions` -- marginal and Marshall-Olkin mark laws;
* :mod:`steinpp.stein_bounds` -- Poisson approximation bounds, exact
  total-variation oracles, intensity measures;
* :mod:`steinpp.maxima` -- Kolmogorov bounds for sample maxima with
  grid-sup oracles;
* :mod:`steinpp.point_process` -- configurations, the d1 matching
  distance, exceedance/PRM/immigration-death simulators;
* :mod:`steinpp.copulas` -- copula families, sampling, tail dependence;
* :mod:`steinpp.archimedean` -- Archimedean generator calculus and the
  joint-exceedance intensity swap constants;
* :mod:`steinpp.mo_geometric` -- the bivariate geometric lattice pipeline;
* :mod:`steinpp.cli` -- batch front-end (``steinpp`` console script).
"""

from . import (  # noqa: F401
    archimedean,
    copulas,
    distributions,
    maxima,
    mo_geometric,
    point_process,
    stein_bounds,
)

__version__ = "0.1.0"
