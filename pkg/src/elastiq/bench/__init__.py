from .config import BenchConfig, plan_from_bound, stack_static_bound
from .runner import RunRecord, run_benchmark

__all__ = ["BenchConfig", "RunRecord", "plan_from_bound",
           "run_benchmark", "stack_static_bound"]
