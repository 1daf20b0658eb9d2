"""Two qubit spin directions at angle alpha: compare the covariant optimum with
the analytic lower bound and the two noisy-spin constructions from the literature."""
import math

from entrimur.minimax_solver import icomp
from entrimur.spin_models import comparison_points, target_pair

alpha = math.pi / 4
pts = comparison_points(alpha)

print(f"alpha = pi/4")
print(f"{'':8}{'gamma':>10}{'phi':>10}{'value':>10}")
g, v = pts["lb"]
print(f"{'LB':8}{g:10.6f}{math.pi / 4 - alpha / 2:10.6f}{v:10.6f}")
for key in ("icomp", "blw", "nv"):
    g, v, phi = pts[key]
    print(f"{key:8}{g:10.6f}{phi:10.6f}{v:10.6f}")

# the generic exchange solver knows nothing about the symmetry; it should agree
x, y = target_pair(alpha)
br = icomp(x, y)
print(f"\ngeneric bracket: [{br.lower:.6f}, {br.upper:.6f}] after {br.rounds_used} rounds")
