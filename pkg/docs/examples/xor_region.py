"""Rate regions of the binary XOR two-way wiretap channel.

Every party sees ``Y1 = Y2 = Z = X1 xor X2``. Each user strips its own input
from the common output, so both links are noiseless, while the eavesdropper
sees only the sum. User 2's uniform input acts as a one-time pad on user 1's
symbol, and the whole unit square is achievable. The outer bound meets it.

Run with ``python3 docs/examples/xor_region.py``.
"""

from twoway_secrecy import GridSpec, builtin_xor, sweep

ch = builtin_xor()
grid = GridSpec(step=0.05)

for kind in ("inner_feedback", "inner_nofeedback", "outer"):
    region = sweep(ch, grid, kind)
    corners = ", ".join(f"({p.r1s:.3f}, {p.r2:.3f})" for p in region.hull)
    print(f"{kind:17s} hull: {corners}")

inner = sweep(ch, grid, "inner_feedback")
print("(1, 1) achievable:", inner.contains((1.0, 1.0)))
