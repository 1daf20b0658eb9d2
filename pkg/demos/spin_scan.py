"""Sweep the angle between two spin directions from 0 to pi/2 and print the
analytic lower bound next to the covariant minimax value."""
import math

import numpy as np

from entrimur.spin_models import spin_scan

for alpha, lb, value, gamma, phi in spin_scan(np.linspace(0, math.pi / 2, 11)):
    bar = "#" * int(round(200 * value))
    print(f"{alpha:6.3f}  lb {lb:.5f}  value {value:.5f}  {bar}")
