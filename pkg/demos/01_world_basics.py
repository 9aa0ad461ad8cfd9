"""
A first look at the tabletop world
==================================

Objects are boxes with poses; skills are pure functions from world to world.
This script builds a small scene by hand, picks a strawberry, and sets it
down on a plate, printing the geometry as it goes.
"""

import math

from owltamp import Aabb, ObjectModel, Pose6, Scene, WorldState
from owltamp import aabb_of, exec_pick, exec_place
from owltamp.world import supported_by

# A one-meter table whose top face sits at z = 0, plus two props.
models = {
    "table_surface": ObjectModel("table_surface", (0.5, 0.5, 0.01), "surface"),
    "strawberry": ObjectModel("strawberry", (0.015, 0.015, 0.018)),
    "plate": ObjectModel("plate", (0.09, 0.09, 0.012), "surface"),
}
workspace = Aabb((-0.1, -0.6, -0.05), (1.1, 0.6, 0.8))
world = WorldState(Scene(models, workspace), {
    "table_surface": Pose6(0.5, 0.0, -0.01),
    "strawberry": Pose6(0.3, 0.1, 0.018),
    "plate": Pose6(0.65, -0.1, 0.012),
})

print("initial boxes:")
for name in world.placed_objects():
    box = aabb_of(world, name)
    print(f"  {name:<14} lower={box.lower} upper={box.upper}")

# A grasp is a 6-DoF hand pose; it must touch the object and stay level.
grasp = Pose6(0.3, 0.1, 0.025)
picked = exec_pick(world, "strawberry", grasp)
print(f"\npick: success={picked.success}")
print(f"  holding: {picked.new_world.held.name}")

# Tilted hands are rejected; the outcome says why rather than raising.
bad = exec_pick(world, "strawberry", grasp.moved(roll=1.2))
print(f"tilted pick: success={bad.success} reason={bad.failure_reason!r}")

# A placement gives a release pose; the object drops straight down onto
# whatever is underneath and keeps its orientation.
drop = Pose6(0.65, -0.1, 0.2, yaw=math.pi / 6)
placed = exec_place(picked.new_world, "strawberry", "plate", drop)
print(f"\nplace: success={placed.success}")
final = placed.new_world
print(f"  settled pose: {final.pose('strawberry')}")
print(f"  supported by: {supported_by(final, 'strawberry')}")

# Skills never mutate their input; the original world still has the berry
# at its starting pose.
print(f"\noriginal world untouched: {world.pose('strawberry')}")
