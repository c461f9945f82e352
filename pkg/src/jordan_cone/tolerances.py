"""Numerical tolerances shared across modules."""

# idempotency of projections, absolute on the order-unit norm
TOL_IDEM = 1e-8
# interior test: min eigenvalue must exceed this
TOL_BOUNDARY = 1e-12
# eigenvalue clustering, scaled by max(1, ||x||)
TOL_CLUSTER = 1e-9
# representative distance for ray equality
TOL_RAY = 1e-9
# unit preservation of Jordan isomorphisms
TOL_UNIT = 1e-12
# multiplicativity of Jordan isomorphisms
TOL_HOM = 1e-9
