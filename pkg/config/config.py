from pydantic_settings import BaseSettings, PydanticBaseSettingsSource
import os


class Settings(BaseSettings):
    log_level: str = "INFO"

    # element-level sub-mesh resolution used when no calibration table applies
    default_n_s_triangle: int = 10
    default_n_s_quad: int = 8
    submesh_ch_warning: float = 0.65

    dense_max_size: int = 200
    dense_pivot_tolerance: float = 1e-14
    sparse_residual_tolerance: float = 1e-8
    max_unknowns: int = 300_000

    # 0 means "use every available core"
    threads: int = 0

    BASE_DIR: str = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    DATA_DIR: str = os.path.join(BASE_DIR, "data")
    MU_TABLE_DIR: str = os.path.join(DATA_DIR, "mu_tables")
    TRIANGLE_MU_TABLE_FILE: str = os.path.join(MU_TABLE_DIR, "triangle.txt")
    QUAD_MU_TABLE_FILE: str = os.path.join(MU_TABLE_DIR, "quad.txt")
    EXPERIMENTS_DIR: str = os.path.join(DATA_DIR, "experiments")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # experiments must be reproducible from their manifests alone
        return (init_settings,)


settings = Settings()
