"""
The pose-constraint language
============================

Constraints arrive as small programs: a few bounds-algebra bindings and one
returned boolean.  They are parsed into a closed expression language and
evaluated against world states - never executed by the Python interpreter.
"""

from owltamp import eval_constraint, parse_constraint
from owltamp.lang import default_bounds, helpers
from owltamp.tasks import load_task

# The classic "is the mug ready for coffee" test: on the table and upright.
source = """
def mug_ready_for_coffee() -> bool:
    ontop_table_bounds = modify_pose_bounds_to_be_ontop_of_object('mug', 'table')
    mug_on_table = position_within_bounds(mug.pose, ontop_table_bounds)
    upright_orientation = abs(mug.pose.roll) < 0.1 and abs(mug.pose.pitch) < 0.1
    return mug_on_table and upright_orientation
"""
fn = parse_constraint(source)
print("parsed, canonical form:")
print(fn.pretty())
print("objects it reads:", sorted(fn.referenced_objects))

# The coffee task starts with the mug on its side, so the check fails there.
_, sideways = load_task("coffee", 0)
print("initial scene satisfies it:", eval_constraint(fn, sideways))

# Stand the mug up and it passes.
upright_pose = sideways.pose("mug").moved(roll=0.0, z=0.05)
poses = dict(sideways.poses)
poses["mug"] = upright_pose
from owltamp import WorldState
fixed = WorldState(sideways.scene, poses)
print("after standing it up:", eval_constraint(fn, fixed))

# The bounds helpers compose; each one intersects the incoming region.
b = default_bounds(fixed)
b = helpers.modify_bounds_near(fixed, b, "mug", 0.2)
b = helpers.modify_bounds_behind(fixed, b, "mug")
print("\nnear-and-behind bounds:")
print("  lower:", tuple(round(v, 3) for v in b.lower[:3]))
print("  upper:", tuple(round(v, 3) for v in b.upper[:3]))

# Chained comparisons and negation work the way the emitted programs use
# them; an infeasible intermediate region simply makes the program false.
tilted = parse_constraint("return 1.4 <= abs(mug.pose.roll) <= 1.65")
print("\nmug tipped on its side?", eval_constraint(tilted, sideways))
print("and after fixing:", eval_constraint(tilted, fixed))
