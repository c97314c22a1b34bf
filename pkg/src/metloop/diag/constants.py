"""Physical constants used by the diagnostics kernels."""

G = 9.80665             # gravitational acceleration [m s-2]
OMEGA = 7.2921159e-5    # Earth rotation rate [s-1]
R_DRY = 287.05          # gas constant, dry air [J kg-1 K-1]
C_P = 1004.6            # specific heat, dry air, constant pressure [J kg-1 K-1]
KAPPA = R_DRY / C_P     # Poisson exponent; derived, never set independently
P0_HPA = 1000.0         # reference pressure [hPa]
EARTH_RADIUS = 6.371e6  # mean Earth radius [m]
PVU = 1e-6              # 1 potential vorticity unit [K m2 kg-1 s-1]

# Curl-type operators are undefined poleward of this latitude (1/cos(lat) blows up).
POLE_MASK_LAT = 89.5
