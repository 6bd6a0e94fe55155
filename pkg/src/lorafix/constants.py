"""Physical constants shared across the package."""

SPEED_OF_LIGHT = 299792458.0  # m/s, exact by SI definition
