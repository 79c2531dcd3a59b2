from hypothesis import settings

# keep property tests deterministic run-to-run, matching the package's
# reproducibility contracts
settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")
