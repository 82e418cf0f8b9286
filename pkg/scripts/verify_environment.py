"""
Verify Hybrid Aggregation Analysis Environment
===============================================
This script checks that the numerical stack is installed and that a few
closed-form reference values come out right:
- Library versions: numpy, scipy, pandas, pydantic, PyYAML
- Settings loaded from HYBRID_MTC_* environment variables / .env
- Occupancy tail cut-off, worked occupancy example, coexistence budget bracket

Run this script after installing requirements.txt.
"""
import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from dotenv import load_dotenv
load_dotenv()

from src.network.occupancy import conditional_occupancy, kmax_for_tail
from src.network.params import NetworkParams
from src.network.scheduling import delta_star
from src.utils.config import get_config


def check_packages():
    """Check that every runtime dependency imports."""
    print("\n" + "="*70)
    print(" Installed Packages")
    print("="*70)

    ok = True
    for name in ("numpy", "scipy", "pandas", "pydantic", "pydantic_settings", "yaml", "dotenv"):
        try:
            module = __import__(name)
            print(f"  {name:20} : {getattr(module, '__version__', 'installed')}")
        except ImportError as e:
            print(f"  {name:20} : ✗ Missing ({e})")
            ok = False
    return ok


def check_settings():
    """Show the effective settings and validate their ranges."""
    print("\n" + "="*70)
    print(" Settings")
    print("="*70)

    settings = get_config()
    for key, value in settings.model_dump().items():
        print(f"  {key:24} : {value}")
    return settings.check_ranges()


def check_reference_values():
    """Compare a few quick computations with known values."""
    print("\n" + "="*70)
    print(" Reference Values")
    print("="*70)

    checks = []

    k_max = kmax_for_tail(30.0, 1e-5)
    checks.append(("k_max(m_bar=30, tau=1e-5) == 56", k_max == 56, k_max))

    pmf = conditional_occupancy(26, 10, 4)
    checks.append(("26 devices on 10x4 channels: Pr(U=2)=0.4, Pr(U=3)=0.6", pmf[2] == 0.4 and pmf[3] == 0.6, pmf))

    for alpha in (2.5, 3.0, 3.6, 4.0, 5.0):
        budget = delta_star(NetworkParams(alpha=alpha))
        lower = 2.0 ** ((2.0 - alpha) / 2.0)
        passed = lower <= budget.value <= 1.0 and abs(budget.residual) <= 1e-9
        checks.append((f"delta* in [{lower:.4f}, 1] at alpha={alpha}", passed, round(budget.value, 6)))

    for label, passed, value in checks:
        print(f"  {'✓' if passed else '✗'} {label}  ({value})")
    return all(passed for _, passed, _ in checks)


def main():
    """Main verification function."""
    print("\n" + "="*70)
    print(" Hybrid Aggregation Environment Verification")
    print("="*70)

    try:
        packages_ok = check_packages()
        settings_ok = check_settings()
        values_ok = check_reference_values()

        # Summary
        print("\n" + "="*70)
        print(" Verification Summary")
        print("="*70)
        if packages_ok and settings_ok and values_ok:
            print("\n✓ Environment is properly configured!")
        else:
            print("\n⚠️  Some checks failed. Review the output above.")
        print("="*70 + "\n")
        return 0 if packages_ok and settings_ok and values_ok else 1

    except Exception as e:
        print(f"\n❌ Verification failed: {e}")
        import traceback
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
