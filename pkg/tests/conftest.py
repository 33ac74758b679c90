from hypothesis import HealthCheck, settings

# First calls into the JIT-compiled permanent kernel and the dense
# eigendecompositions are slow enough to trip hypothesis' per-example
# deadline, so disable it suite-wide.
settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")
