"""Reznick-type sum-of-squares certificates for positive bi-Hermitian and real forms."""
from __future__ import annotations

__version__ = "0.1.0"

from .symspace import (  # noqa: E402
    ExtremaEstimate, HermOp, RealSymPoly, bernstein_check, estimate_extrema, eval_poly,
    laplacian_complex, laplacian_real, partial_trace, poly_from_op, real_dim_const, real_partial_trace,
    sym_dim, sym_indices, trace_adjoint,
)
from .chiribella import (  # noqa: E402
    CoeffTable, SymLinearMap, build_Clone, build_MP, build_MP_real, build_Phi, build_Phi_real, build_Psi,
    build_Psi_real, coeff_c, coeff_c_real, coeff_q, coeff_q_real, coeff_qhat, verify_chiribella,
    verify_real_identity,
)
from .designs import (  # noqa: E402
    SphericalDesign, build_design, laguerre_nodes, moment_atoms, verify_design, verify_hilbert_complex,
    verify_hilbert_real, wick_check,
)
from .certify import (  # noqa: E402
    BoundReport, CertBundle, bound_n_complex, bound_n_numeric, bound_n_real, bound_n_real_numeric,
    build_certificate, build_certificate_real, motzkin_eps_threshold, motzkin_poly,
)
from .definetti import (  # noqa: E402
    DeFinettiReport, definetti_real_delta, definetti_report, truncated_marginal_map,
)
from .estimator import RealReznickCertifier, ReznickCertifier  # noqa: E402
