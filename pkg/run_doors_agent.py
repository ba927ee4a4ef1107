"""
Doors Agent Demo

Run the statistics-collecting agent on the three-door world and print what it
learned about each door.
"""

from src.world_insight.main import RunConfig, run_agent
from src.world_insight.world.streams import Seeds

print("\n" + "="*70)
print("🚪 Running the agent in the doors world")
print("="*70 + "\n")

print("Door d0 is always locked, d1 always unlocked, d2 unlocked one day in seven.")
print("Watch the per-door predictions in the report below...\n")

result = run_agent(
    RunConfig(
        world="builtin:doors",
        seeds=Seeds(predictable=1, unpredictable=2, noise=3, policy=4),
        horizon=2000,
    )
)

print("\n" + "="*70)
print("✅ Agent finished!" if result["status"] == "success" else f"❌ Agent failed: {result['error']}")
print("="*70)
