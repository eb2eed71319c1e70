"""
E_max of qubit channels, three ways
===================================

A walk through the SDP programs and the reduced search on the amplitude
damping channel, where everything has a closed form to compare against.
Run with ``python notebooks/channel_emax_tour.py``.
"""

import numpy as np

from qnetbounds.channels import ad_lower_closed, choi, make_channel
from qnetbounds.emax import (emax_lower_sdp, emax_reduced, emax_sigma_sdp,
                             emax_upper_marginal_sdp)
from qnetbounds.linalg import eigvalsh, partial_transpose

# The Choi state of amplitude damping is entangled for every lambda < 1:
# its partial transpose has a negative eigenvalue.
for lam in (0.0, 0.5, 0.9, 1.0):
    pi = choi(make_channel("amplitude_damping", lam)).matrix
    print(f"lambda={lam:.1f}  min eig of partial transpose = {eigvalsh(partial_transpose(pi, (2, 2)))[0]:+.4f}")

# %%
# The sigma program gives E_max itself; the lower program stops short of
# it for a channel that is not Choi-simulable, and the marginal-constrained
# program lands back on E_max.
print("\nlambda   sigma    log2(2-l)  lower    analytic  upper")
for lam in np.linspace(0, 1, 6):
    ch = make_channel("amplitude_damping", lam)
    row = (emax_sigma_sdp(ch).value, np.log2(2 - lam), emax_lower_sdp(ch).value,
           ad_lower_closed(lam), emax_upper_marginal_sdp(ch).value)
    print(f"{lam:.1f}    " + "  ".join(f"{v:.6f}" for v in row))

# %%
# The symmetry-reduced search only needs five real parameters.  It is slower
# per call than an SDP but needs nothing beyond a closed-form D_max.
ch = make_channel("amplitude_damping", 0.8)
print("\nreduced, upper variant:", round(emax_reduced(ch, "upper").value, 6))
print("reduced, lower variant:", round(emax_reduced(ch, "lower").value, 6))

# %%
# On Choi-simulable channels the lower program already equals E_max.
for kind in ("dephasing", "erasure", "depolarizing"):
    ch = make_channel(kind, 0.4)
    print(f"{kind:13s} sigma={emax_sigma_sdp(ch).value:.6f} lower={emax_lower_sdp(ch).value:.6f}")
