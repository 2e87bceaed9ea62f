"""hardyforge: Hardy weights for second-order elliptic operators.

Builds Hardy weights through the supersolution construction and
certifies, at desk scale, the properties that make them optimal:
criticality with best constant 1, optimality in neighbourhoods of the
singular points, null-criticality (logarithmic mass growth), the
spectral representation with spectrum [1, inf), Rellich-type
inequalities and completeness of the induced Agmon metric, plus a
catalog of closed-form examples.
"""

__version__ = "0.1.0"

from . import agmon, catalog, construct, numgrid, radial, spectral, varify  # noqa: F401,E402
