"""Grid self-convergence of the Brio-Wu problem: L1 differences between
successive resolutions and the observed order."""
from rmhd_ap.driver import convergence_study
from rmhd_ap.scenarios import preset

rows = convergence_study(preset("brio-wu"), [100, 200, 400], out="convergence.csv")
for r in rows:
    line = f"{r['nx']:4d} -> {r['nx_fine']:4d}: err(rho) = {r['err_rho']:.4e}"
    if "order_rho" in r:
        line += f"   order(rho) = {r['order_rho']:.2f}"
    print(line)
print("table written to convergence.csv")
