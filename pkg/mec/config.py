"""Environment-driven defaults.

Values are read at call time so a ``.env`` loaded by the entry point (or a
test's ``monkeypatch.setenv``) takes effect without re-importing.
"""
import os


def max_columns() -> int:
    return int(os.getenv('MEC_MAX_COLUMNS', 4096))


def max_universe() -> int:
    return int(os.getenv('MEC_MAX_UNIVERSE', 20))


def max_threshold_expansion() -> int:
    return int(os.getenv('MEC_MAX_THRESHOLD_EXPANSION', 8))


def max_mds_check() -> int:
    return int(os.getenv('MEC_MAX_MDS_CHECK', 16))


def sim_step_cap() -> int:
    return int(os.getenv('MEC_SIM_STEP_CAP', 1_000_000))


def sim_delay_bound() -> int:
    return int(os.getenv('MEC_SIM_DELAY_BOUND', 64))


def random_tree_ranges() -> tuple[int, int, int]:
    """(min nodes, max nodes, max depth) for the random access-tree generator."""
    return (
        int(os.getenv('MEC_RANDOM_NODES_MIN', 3)),
        int(os.getenv('MEC_RANDOM_NODES_MAX', 10)),
        int(os.getenv('MEC_RANDOM_DEPTH_MAX', 4)),
    )


def log_level() -> str:
    return os.getenv('LOG_LEVEL', 'WARNING').upper()
