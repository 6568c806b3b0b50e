from __future__ import annotations
import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()

@dataclass(frozen=True)
class Settings:
    # Telemetry (the only values taken from the environment)
    appinsights_connection_string: str | None = os.getenv("APPLICATIONINSIGHTS_CONNECTION_STRING")
    log_level: str = os.getenv("CENSORED_REGRET_LOG_LEVEL", "WARNING")

    # BSAA worst case (two 1-D searches per crossing piece)
    bsaa_tol: float = 1e-4
    golden_iterations: int = 40

    # Kaplan-Meier lattice
    km_mesh: float = 1.0 / 200.0
    km_refine_factor: int = 10
    km_enumeration_cap: int = 2_000_000

    # Oracles
    oracle_exact_cap: int = 10**7
    mc_block_size: int = 4096

    # Design optimization
    n_max_cap: int = 10_000
    lp_max_iterations: int = 50_000

    # Sample complexity: relative slack on the regret target
    sample_complexity_rtol: float = 1.5e-3

    # Sweeps
    workers: int = 1

settings = Settings()
