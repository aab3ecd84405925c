"""
Runtime settings
Search budgets and exactness thresholds, read from the environment (.env supported)
"""
import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

# Load .env from project root
env_path = Path(__file__).parent.parent / '.env'
load_dotenv(dotenv_path=env_path)


@dataclass
class Settings:
    """Budgets shared by the solver, the detectors and the cleaner"""
    max_nodes: int = 100_000_000
    max_seconds: float = 600.0
    oracle_edge_cap: int = 24
    star_dp_max_terminals: int = 20
    star_seed_max_terminals: int = 8
    treewidth_exact_vertices: int = 10
    tough_pair_exact_vertices: int = 12
    tough_pair_max_nodes: int = 2_000_000
    clique_exact_limit: int = 16
    clean_max_pair: int = 9
    clean_noise_depth: int = 3
    clean_noise_max_vertices: int = 40
    log_level: str = 'WARNING'


def load_settings() -> Settings:
    """Build settings from DSN_* environment variables"""
    return Settings(
        max_nodes=int(os.getenv('DSN_MAX_NODES', '100000000')),
        max_seconds=float(os.getenv('DSN_MAX_SECONDS', '600')),
        oracle_edge_cap=int(os.getenv('DSN_ORACLE_EDGE_CAP', '24')),
        star_dp_max_terminals=int(os.getenv('DSN_STAR_DP_MAX_TERMINALS', '20')),
        star_seed_max_terminals=int(os.getenv('DSN_STAR_SEED_MAX_TERMINALS', '8')),
        treewidth_exact_vertices=int(os.getenv('DSN_TREEWIDTH_EXACT_VERTICES', '10')),
        tough_pair_exact_vertices=int(os.getenv('DSN_TOUGH_PAIR_EXACT_VERTICES', '12')),
        tough_pair_max_nodes=int(os.getenv('DSN_TOUGH_PAIR_MAX_NODES', '2000000')),
        clique_exact_limit=int(os.getenv('DSN_CLIQUE_EXACT_LIMIT', '16')),
        clean_max_pair=int(os.getenv('DSN_CLEAN_MAX_PAIR', '9')),
        clean_noise_depth=int(os.getenv('DSN_CLEAN_NOISE_DEPTH', '3')),
        clean_noise_max_vertices=int(os.getenv('DSN_CLEAN_NOISE_MAX_VERTICES', '40')),
        log_level=os.getenv('DSN_LOG_LEVEL', 'WARNING'),
    )


# Singleton instance
_settings_instance = None

def get_settings() -> Settings:
    """Get or create the process-wide settings"""
    global _settings_instance
    if _settings_instance is None:
        _settings_instance = load_settings()
    return _settings_instance
