"""Anchored localization: build the optimal dual stress and read off the gap.

A random network with four anchors and six sensors in the plane, connected
so that the sensors can be placed one at a time.  The dual solution carries
edge weights; the duality gap against the true squared distances is zero.

    python3 demos/sensor_network.py
"""
from unirigid import anchored_stress, random_network

net = random_network(2, 6, m=4, seed=3)
print(f"{net.sensors.shape[1]} sensors, {net.anchors.shape[1]} anchors, {len(net.sensor_edges)} sensor edges, "
      f"{len(net.anchor_edges)} anchor edges")

res, steps = anchored_stress(net)
print(f"{len(steps)} column steps")
print("sensor-sensor weights:")
for (i, j), w in sorted(res.sensor_weights.items()):
    print(f"  x{i}-x{j}: {float(w):+.6g}")
print("anchor-sensor weights:")
for (k, j), w in sorted(res.anchor_weights.items()):
    print(f"  a{k}-x{j}: {float(w):+.6g}")

from unirigid import verify_anchored_stress  # noqa: E402

rep = verify_anchored_stress(res.S, net)
print(f"\nrank {rep.rank} (want {net.sensors.shape[1]}), duality gap {rep.duality_gap}, all checks: {rep.passed}")
