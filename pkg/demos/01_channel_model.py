"""
Channel of a pinching-antenna waveguide
=======================================

A signal enters the waveguide at the feed point and leaks out at every
pinched position. Each antenna contributes a term whose amplitude falls with
the free-space distance to the user and whose phase collects both the
in-waveguide and the free-space path.
"""
import numpy as np

from pinchnoma import AntennaLayout, SystemConfig, UserPair, effective_channel
from pinchnoma.model import antenna_terms

cfg = SystemConfig.from_units(fc_ghz=28, power_dbm=30)
users = UserPair(x_p=1.0, y_p=2.0, x_s=4.0, y_s=0.5)
print("wavelength %.4f m, guided wavelength %.4f m" % (cfg.wavelength, cfg.guided_wavelength))

# One antenna: only the distance matters
for x in (0.0, users.x_s, 5.0):
    g = effective_channel(cfg, users, AntennaLayout((x,))).gain("s")
    print("x = %.2f m  |h_s|^2 = %.3e" % (x, g))

# Two antennas: the second one can add to or cancel the first, depending on
# where it sits within a fraction of a wavelength
first = users.x_s
offsets = cfg.min_spacing_delta + np.linspace(0, 3 * cfg.wavelength, 7)
for off in offsets:
    lay = AntennaLayout((first, first + off))
    print("spacing %.2f lambda  |h_s|^2 = %.3e" % (off / cfg.wavelength, effective_channel(cfg, users, lay).gain("s")))

# The per-antenna terms are plain complex numbers; the channel is their sum
terms = antenna_terms(cfg, users, "s", np.array([first, first + offsets[3]]))
print("terms", np.round(terms / np.abs(terms).max(), 3))

# In-waveguide loss only bites over metres
lossy = cfg.replace(inwaveguide_attenuation=0.08)
for x in (1.0, 10.0):
    a = effective_channel(lossy, users, AntennaLayout((x,))).gain("p")
    b = effective_channel(cfg, users, AntennaLayout((x,))).gain("p")
    print("antenna at %4.1f m loses %.2f dB in the waveguide" % (x, 10 * np.log10(b / a)))
