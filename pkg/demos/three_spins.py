"""Three orthogonal spin components measured together.

The covariant family is parametrised by one number c; the best member sits at
the end of its range and its error is maximised on Pauli eigenstates.
"""
import math

from entrimur.spin_models import three_spin_suite

r = three_spin_suite()
print(f"c* = {r['c_star']:.6f}  (1/sqrt 3 = {1 / math.sqrt(3):.6f})")
print(f"value at Pauli eigenstates: {r['pauli_value']:.9f}")
print(f"value from a sphere scan:   {r['scan_value']:.9f}")
print(f"log(3 - sqrt 3):            {math.log2(3 - math.sqrt(3)):.9f}")
