"""Why tracked velocities matter to a planner.

Two small experiments:

1. Track initiation latency. A person steps out from behind a wall at
   1 m/s. The fast preset (c_init=5, threshold 0.8) initiates the track
   within half a second of first detectability; the accuracy-oriented
   preset (c_init=10, threshold 0.85) is strictly slower.

2. Head-on avoidance lead. A robot capped at 0.5 m/s drives toward a
   person approaching at 1 m/s from 3 m away. A closed-form closest-
   approach check that uses the tracked velocity flags the collision more
   than a second before the same check with the person assumed static,
   which is reaction time a slow robot badly needs.
"""

from lidarmot.config import expand_preset
from lidarmot.experiments import (
    closed_form_lead,
    emergence_scenario,
    head_on_lead_time,
    measure_initiation,
)
from lidarmot.geometry import PointXY
from lidarmot.pipeline import DynamicObstacle, forecast_position, time_to_closest_approach

print("track initiation after emerging from occlusion")
scenario = emergence_scenario(seed=0)
for preset in ("config-3", "config-1"):
    result = measure_initiation(expand_preset(preset), scenario)
    print(f"  {preset}: first >=5-beam visibility at t={result.first_visible:.2f} s, "
          f"track initiated at t={result.first_initiated:.2f} s "
          f"(latency {result.latency:.2f} s)")

print("\nhead-on closest-approach forecast")
ob = DynamicObstacle(1, PointXY(3.0, 0.0, frame="odom"), (-1.0, 0.0), 0.0)
t_star, d_min = time_to_closest_approach(PointXY(0, 0, frame="odom"), (0.5, 0.0), ob)
ahead = forecast_position(ob, 1.0)
print(f"  closest approach in {t_star:.2f} s at {d_min:.2f} m; "
        f"person forecast 1 s ahead: ({ahead.x:.2f}, {ahead.y:.2f})")

result = head_on_lead_time()
print(f"  alert with tracked velocity at t={result.first_alert_cv:.2f} s, "
      f"with static assumption at t={result.first_alert_static:.2f} s")
print(f"  avoidance lead {result.lead:.2f} s "
      f"(closed form {closed_form_lead():.2f} s)")
