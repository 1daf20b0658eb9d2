"""Two hand-built pairs: compatible, yet the first cannot be measured without
disturbing the second.  Incompatibility is zero while the error/disturbance
coefficient is not."""
from entrimur.gallery import hw_example_1, hw_example_2
from entrimur.minimax_solver import SolverConfig, iad, icomp

for case, cfg in ((hw_example_1(), SolverConfig()), (hw_example_2(), SolverConfig(outer_tol=1e-7))):
    a, b = case.targets
    print(case.name)
    print(f"  provided joint reproduces the marginals to {case.marginal_error():.1e}")
    br = icomp(a, b, cfg)
    print(f"  icomp   [{br.lower:.3e}, {br.upper:.3e}]")
    for label, x, y in (("iad(A,B)", a, b), ("iad(B,A)", b, a)):
        bi = iad(x, y, cfg)
        print(f"  {label} [{bi.lower:.3e}, {bi.upper:.3e}]")
