"""lvaluelab: numerical experiments on the joint value distribution of L-functions.

Modules
-------
lfunc_registry   L-function and tuple descriptions (zeta, Dirichlet L-functions)
critline_eval    evaluation of log F on the critical line, zeros, sampling
dirichlet_poly   prime-power Dirichlet polynomials, smoothing, variances
random_model     random Euler products, exact moment generating functions, tails
beurling_selberg band-limited box-indicator approximations
stats_lab        tails, moments, CLT diagnostics, hybrid-formula residuals
cli_io           command-line interface and sample cache
"""
__version__ = "0.1.0"
