"""Fourier-conjugate bases over GF(p^n): closed-form bounds around the error of
the optimal covariant phase-space measurement, for the first few field sizes."""
from entrimur.bounds_reports import kp_lower_bound, prep_coefficient
from entrimur.finite_field_mub import field_construct, mub_bound_sandwich, mub_pair

for p, n in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1)]:
    f = field_construct(p, n)
    lower, value, upper = mub_bound_sandwich(f)
    q, pp = mub_pair(f)
    print(f"GF({p}^{n}) modulus {f.modulus}: {lower:.6f} <= {value:.6f} <= {upper:.6f}"
          f"   prep {prep_coefficient(q, pp):.6f}  kp {kp_lower_bound(q, pp):.6f}")
