"""Lines of minima, Teichmuller geodesics, and coarse-distance audits.

The package is organized in layers:

- ``curves``      topological surfaces, weighted multicurves, intersection
                  numbers, twisting and balance times
- ``flat``        square-tiled flat surfaces, the e^t geodesic flow,
                  cylinder/annulus analysis and the short-curve quantities
- ``hyperbolic``  Fenchel-Nielsen structures, holonomy, geodesic lengths,
                  hyperbolic twists
- ``uniformize``  the numerical bridge between flat (conformal) and
                  hyperbolic descriptions of the once-punctured torus
- ``minima``      the convex length functional e^t l(nu+) + e^-t l(nu-) and
                  its minimizer tracing
- ``metric``      per-curve upper-half-plane coordinates, product-region
                  coarse distances, exact distances on the punctured torus
- ``harness``     experiment runner: quasi-geodesy certification and the
                  decay / twist / surgery audits
"""

from teichmin.curves import (
    SurfaceSig,
    CurveClass,
    MeasuredMulticurve,
    BalanceTime,
    intersection_number,
    fills,
    dehn_twist,
    relative_twist,
    balance_time,
)

__all__ = [
    "SurfaceSig",
    "CurveClass",
    "MeasuredMulticurve",
    "BalanceTime",
    "intersection_number",
    "fills",
    "dehn_twist",
    "relative_twist",
    "balance_time",
]

__version__ = "0.1.0"
