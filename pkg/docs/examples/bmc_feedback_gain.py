"""How much key feedback buys on the binary multiplying channel.

In the BMC every output equals ``X1 AND X2``. User 1 is heard only when user 2
sends a one, so secrecy for user 1 has to come from randomness that the
eavesdropper cannot separate. Without feedback that randomness is user 2's
own dummy bins. With feedback user 2 also sends a key that user 1 uses as a
one-time pad in the next block.

The script sweeps both inner regions and prints the boundary gap over a
coarse set of user-2 rates.

Run with ``python3 docs/examples/bmc_feedback_gain.py``.
"""

import numpy as np

from twoway_secrecy import GridSpec, builtin_bmc, sweep

ch = builtin_bmc()
grid = GridSpec(step=0.02)
fb = sweep(ch, grid, "inner_feedback")
nf = sweep(ch, grid, "inner_nofeedback")

r2 = np.linspace(0.0, fb.max_r2, 11)
print("   r2   feedback  no feedback   gain")
for v, a, b in zip(r2, fb.r1s_at(r2), nf.r1s_at(r2)):
    gain = "" if np.isnan(b) else f"{a - b:7.4f}"
    nfb = "      -" if np.isnan(b) else f"{b:8.4f}"
    print(f"{v:6.3f} {a:9.4f} {nfb:>12s} {gain}")
