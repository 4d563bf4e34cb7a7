"""Print the exponent table and mark the ratios for which every norm grows."""

from nsverify.scaling import table1

print(f"{'r':>5} {'omega':>6} {'u':>5} {'E':>6}  all positive")
for rec in table1():
    print(f"{str(rec.r):>5} {str(rec.omega_exp):>6} {str(rec.u_exp):>5} {str(rec.E_exp):>6}  {rec.blowup_safe}")
