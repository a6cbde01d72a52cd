"""Multi-agent epistemic planner with a learned search heuristic.

The compiled extension carries the full surface; this package re-exports it.
Installed wheels place the extension inside the package, while in-tree test
runs put it on the import path next to it.
"""

try:
    from . import _epiplan as _impl
except ImportError:  # in-tree build: extension lives on PYTHONPATH
    import _epiplan as _impl

__version__ = "0.1.0"

Formula = _impl.Formula
Problem = _impl.Problem
State = _impl.State
Graph = _impl.Graph
Model = _impl.Model
SearchResult = _impl.SearchResult

parse_problem = _impl.parse_problem
serialize_problem = _impl.serialize_problem
builtin_problem = _impl.builtin_problem
load_instance = _impl.load_instance

initial_state = _impl.initial_state
entails = _impl.entails
satisfies_goal = _impl.satisfies_goal
bisim_reduce = _impl.bisim_reduce
canonical_hash = _impl.canonical_hash
successor_states = _impl.successor_states

bfs = _impl.bfs
astar = _impl.astar
validate_plan = _impl.validate_plan

encode_state = _impl.encode_state
from_dot = _impl.from_dot
generate_dataset = _impl.generate_dataset
read_jsonl = _impl.read_jsonl
write_jsonl = _impl.write_jsonl

train_model = _impl.train_model
predict_distance = _impl.predict_distance
save_model = _impl.save_model
load_model = _impl.load_model
normalize_distance = _impl.normalize_distance
denormalize_distance = _impl.denormalize_distance

iqm = _impl.iqm
iqr_std = _impl.iqr_std
percent_reduction = _impl.percent_reduction

run_cli = _impl.run_cli

__all__ = [
    "Formula",
    "Problem",
    "State",
    "Graph",
    "Model",
    "SearchResult",
    "parse_problem",
    "serialize_problem",
    "builtin_problem",
    "load_instance",
    "initial_state",
    "entails",
    "satisfies_goal",
    "bisim_reduce",
    "canonical_hash",
    "successor_states",
    "bfs",
    "astar",
    "validate_plan",
    "encode_state",
    "from_dot",
    "generate_dataset",
    "read_jsonl",
    "write_jsonl",
    "train_model",
    "predict_distance",
    "save_model",
    "load_model",
    "normalize_distance",
    "denormalize_distance",
    "iqm",
    "iqr_std",
    "percent_reduction",
    "run_cli",
]
