"""Split an intensity into J, R and Q, then look at how the UGKS flux coefficients
move between free transport and diffusion as the opacity grows."""
import numpy as np

from rmhd_ap import NondimParams, build_quadrature, decompose, moment, recompose
from rmhd_ap.ugks import ugks_coefficients

quad = build_quadrature(8)
print("Gauss-Legendre S8 nodes:", np.round(quad.nodes, 4))

I = np.exp(2 * quad.nodes) + 0.3 * quad.nodes ** 4      # a forward-peaked intensity
cell = decompose(I, quad)
print(f"J = {cell.J:.6f}   R = {cell.R:.6f}")
print(f"<Q> = {moment(cell.Q, 0, quad):.1e}   <nQ> = {moment(cell.Q, 1, quad):.1e}")
print("reconstruction error:", np.abs(recompose(cell, quad) - I).max())

print("\nFlux coefficients at dt = 0.1 as the scattering opacity grows (c = 1, eps = 1):")
p = NondimParams.from_regime("unit", 1.0, 1.0, La=1.0, Ls=1.0, curlyC=1.0)
print(f"{'sigma_s':>9} {'A':>10} {'C1':>10} {'D1':>10} {'F':>10}")
for ss in (1e-6, 1e-2, 1.0, 1e2, 1e4):
    k = ugks_coefficients(0.1, 1e-6, ss, p)
    print(f"{ss:9.0e} {float(k.A):10.4g} {float(k.C1):10.4g} {float(k.D1):10.4g} {float(k.F):10.4g}")
print("A (free streaming) fades and the diffusion slope D1 -> -1/sigma_s takes over.")
