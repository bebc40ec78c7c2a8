from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # --- Runtime ---

    # App Environment
    app_env: str = "local"
    log_level: str = "INFO"

    # CLI defaults
    default_seed: int = 0
    default_until_ms: int = 600_000

    # --- Simulation defaults (overridable per scenario) ---

    # CCCM
    poll_period_ms: int = 1000
    window_size: int = 3
    weak_loss_threshold: float = 0.10
    weak_latency_threshold_ms: float = 500.0
    weak_throughput_threshold: float = 0.25

    # Link model
    baseline_latency_ms: float = 20.0

    # State model
    transient_dwell_ms: int = 100

    # ZM
    reauth_stagger_ms: int = 200
    central_auth_timeout_ms: int = 2000
    auto_reattach: bool = True
    reattach_delay_ms: int = 50
    full_services: list[str] = ["Internet", "Voice", "Messaging"]

    # LAA / LSS
    sync_period_ms: int = 5000

    # SA
    push_retry_ms: int = 20
    push_max_attempts: int = 4

    # ES
    disaster_ttl_ms: int = 3_600_000
    restricted_quota: int = 5
    restricted_window_ms: int = 60_000

    # Interconnect
    weak_latency_factor: int = 10
    weak_drop_probability: float = 0.2
    weak_high_priority_drop_probability: float = 0.05

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )
