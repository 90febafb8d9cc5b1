#!/usr/bin/env python3
"""Mesh convergence walk-through: ball volume and the two analytic energies.

The equator map x/|x| has Dirichlet energy 4*pi (the integral of 1/|x|^2
over the unit ball); the great-circle map (sin x1, 0, cos x1) has constant
energy density 1/2, hence energy 2*pi/3. Both converge under refinement.
"""

import numpy as np

from hfss import build_ball_mesh, energy
from hfss.initial_data import equator_map, great_circle_map

BALL = 4.0 * np.pi / 3.0

print(f"{'N':>4} {'volume':>10} {'err%':>7} {'E[x/|x|]':>10} {'err%':>7} "
      f"{'E[circle]':>10} {'err%':>7}")
for n in (8, 16, 24, 32, 48, 64):
    mesh = build_ball_mesh(n)
    e_eq = energy(equator_map(mesh))
    e_gc = energy(great_circle_map(mesh))
    print(f"{n:>4} {mesh.volume():>10.4f} "
          f"{100 * abs(mesh.volume() - BALL) / BALL:>6.2f}% "
          f"{e_eq:>10.4f} {100 * abs(e_eq - 4 * np.pi) / (4 * np.pi):>6.2f}% "
          f"{e_gc:>10.4f} {100 * abs(e_gc - 2 * np.pi / 3) / (2 * np.pi / 3):>6.2f}%")

print("\nexact: volume = 4pi/3 = %.4f, E[x/|x|] = 4pi = %.4f, "
      "E[great-circle] = 2pi/3 = %.4f" % (BALL, 4 * np.pi, 2 * np.pi / 3))
