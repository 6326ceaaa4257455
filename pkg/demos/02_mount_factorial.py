"""Where to put the field mill on the robot: mount position x motor x wheel charge."""

# %%
# Four candidate mounts are tried with the motor off and on, and with the
# wheels grounded or rubbed. A handheld mill at the same place gives the
# reference band (median +/- 2 standard errors).

from platecharge import handheld_reference, load_config, run_factorial, summarize

cfg = load_config()
records = run_factorial(cfg.factorial, cfg.robot, cfg.sensor, cfg.world, cfg.seed, cfg.mount_table)
reference = handheld_reference(cfg.factorial, cfg.handheld, cfg.sensor, cfg.world, cfg.seed)

(hand,) = summarize(reference)
low, high = hand.band
print(f"handheld reference: median {hand.median:.4f} V, band [{low:.4f}, {high:.4f}]")

# %%
# One line per cell. Only the flush-front mount sits near the wheels, so it is
# the only one that moves when they are charged. Motor state makes no
# difference because motor interference is off by default.

for s in summarize(records, "condition"):
    inside = "inside" if low <= s.mean <= high else "outside"
    print(f"{s.position_label:32s} mean {s.mean:.4f} V  se {s.se:.4f}  {inside} band")

# %%
# The wheel effect in units of each mount's standard error.

cells = {s.position_label: s for s in summarize(records, "condition")}
for mount in cfg.factorial.mounts:
    base = cells[f"{mount.value}|motor_off|wheels_n"]
    rubbed = cells[f"{mount.value}|motor_off|wheels_c"]
    print(f"{mount.value:15s} shift {(rubbed.mean - base.mean) / base.se:6.2f} se")
