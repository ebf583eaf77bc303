"""Walk through a three-point instance by hand.

Run: python demos/small_case.py
"""

from linerecon.engine import EngineParams, EngineState, reconstruct
from linerecon.graph import observe_distances
from linerecon.oracle import OracleResult
from linerecon.pointset import make_point_set

for coords in ([0, 1, 2], [0, 1, 3]):
    V = make_point_set(coords)
    G = observe_distances(V, [(0, 1), (1, 2)])
    oracle = OracleResult.of(G)
    report = reconstruct(G)
    print(f"points {coords}, distances |01|={G.distance(0, 1)} |12|={G.distance(1, 2)}")
    print(f"  embedding classes: {[list(c) for c in oracle.components[0].classes]}")
    print(f"  oracle largest set: {list(oracle.largest)}")
    print(f"  engine clusters: {[c.relpos for c in report.clusters]} full={report.full}")

# the same instance fed one distance at a time
V = make_point_set([0, 1, 2])
state = EngineState(3, EngineParams(edge_budget=0))
for u, v in [(0, 1), (2, 1)]:
    state.online_update(u, v, V.distance(u, v))
    print(f"after revealing ({u}, {v}): certified_full={state.certified_full()}")
