#!/usr/bin/env python3
"""
System Verification Script

Checks that the toolkit is installed and configured and that the bundled
fixtures load and solve. Run this after setting up the project.
"""

import os
import sys
from dotenv import load_dotenv

load_dotenv()

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

FIXTURES = os.path.join('data', 'fixtures')


def print_header(text):
    """Print formatted section header"""
    print("\n" + "="*70)
    print(f"  {text}")
    print("="*70)

def check_mark(passed):
    """Return check mark or X"""
    return "✅" if passed else "❌"

def check_python_version():
    """Check Python version"""
    print_header("Python Version")
    version = sys.version_info
    print(f"Python {version.major}.{version.minor}.{version.micro}")

    required = (3, 9)
    passed = version >= required
    print(f"{check_mark(passed)} Required: Python 3.9+")
    return passed

def check_python_packages():
    """Check required Python packages"""
    print_header("Python Packages")

    required_packages = {
        'networkx': 'networkx',
        'dotenv': 'python-dotenv',
        'pytest': 'pytest',
        'hypothesis': 'hypothesis',
    }

    missing = []
    for module, package in required_packages.items():
        try:
            __import__(module)
            print(f"✅ {package}")
        except ImportError:
            print(f"❌ {package} (missing)")
            missing.append(package)

    if missing:
        print(f"\nInstall missing packages: pip install {' '.join(missing)}")
        return False

    return True

def check_settings():
    """Show the effective DSN_* settings"""
    print_header("Settings")

    try:
        from dsn.config import get_settings
        settings = get_settings()
    except ValueError as e:
        print(f"❌ Invalid DSN_* value: {e}")
        return False

    for name, value in sorted(vars(settings).items()):
        print(f"   {name} = {value}")
    if not os.path.exists('.env'):
        print("⚠️ No .env file; using defaults (copy .env.example to override)")
    return True

def check_files():
    """Check if required files exist"""
    print_header("Required Files")

    required_files = [
        'dsn/app.py',
        'dsn/solver.py',
        'dsn/cleaner.py',
        'data/instance_io.py',
        os.path.join(FIXTURES, 'small_instance.txt'),
        os.path.join(FIXTURES, 'matching_t2.txt'),
        os.path.join(FIXTURES, 'gt_sat_k2_n3.txt'),
        os.path.join(FIXTURES, 'gt_unsat_k2_n3.txt'),
    ]

    all_exist = True
    for file_path in required_files:
        exists = os.path.exists(file_path)
        print(f"{check_mark(exists)} {file_path}")
        if not exists:
            all_exist = False

    if not all_exist:
        print("\n   Regenerate fixtures with: python create_test_data.py")
    return all_exist

def check_fixtures():
    """Load the fixtures and check their known answers"""
    print_header("Fixtures")

    try:
        from data.instance_io import load_document, load_grid_tiling
        from dsn.grid_tiling import grid_tiling_solve
        from dsn.patterns import recognize_hard_pattern
        from dsn.solver import solve

        inst = load_document(os.path.join(FIXTURES, 'small_instance.txt')).instance
        weight = solve(inst).weight
        print(f"{check_mark(weight == 5)} small_instance optimum: {weight}/5")

        pattern = recognize_hard_pattern(
            load_document(os.path.join(FIXTURES, 'matching_t2.txt')).instance.demand_graph())
        matched = pattern is not None and pattern.kind == 'Matching' and pattern.t == 2
        print(f"{check_mark(matched)} matching_t2 recognized as 2-hard Matching")

        sat = grid_tiling_solve(load_grid_tiling(os.path.join(FIXTURES, 'gt_sat_k2_n3.txt'))) is not None
        unsat = grid_tiling_solve(load_grid_tiling(os.path.join(FIXTURES, 'gt_unsat_k2_n3.txt'))) is None
        print(f"{check_mark(sat)} gt_sat_k2_n3 satisfiable")
        print(f"{check_mark(unsat)} gt_unsat_k2_n3 unsatisfiable")

        return weight == 5 and matched and sat and unsat

    except Exception as e:
        print(f"❌ Error checking fixtures: {e}")
        return False

def check_gadgets():
    """Check the closed-form gadget constants"""
    print_header("Gadget Constants")

    try:
        from dsn.gadgets import connector_constants

        expected = {2: 151, 3: 344, 4: 615}
        passed = True
        for n, c_star in expected.items():
            measured = connector_constants(n)['C_star']
            ok = measured == c_star
            passed = passed and ok
            print(f"{check_mark(ok)} C_star(n={n}) = {measured}")
        return passed

    except Exception as e:
        print(f"❌ Error checking gadgets: {e}")
        return False

def main():
    """Run all checks"""
    print("\n" + "="*70)
    print("  🧪 DSN TOOLKIT - SYSTEM VERIFICATION")
    print("="*70)
    print("\nChecking system configuration...")

    results = {
        'Python Version': check_python_version(),
        'Python Packages': check_python_packages(),
        'Settings': check_settings(),
        'Required Files': check_files(),
        'Fixtures': check_fixtures(),
        'Gadget Constants': check_gadgets(),
    }

    # Summary
    print_header("Summary")
    passed = sum(1 for v in results.values() if v)
    total = len(results)

    for name, result in results.items():
        print(f"{check_mark(result)} {name}")

    print(f"\n{passed}/{total} checks passed")

    if passed == total:
        print("\n🎉 All systems ready!")
        print("\nNext steps:")
        print("  1. Run the tests:     python test_solver.py (or pytest)")
        print("  2. Solve an instance: python -m dsn solve data/fixtures/small_instance.txt")
        print("  3. Check a gadget:    python -m dsn verify lemma-cg --n 2")
        print("\nSee QUICKSTART.md for the full command reference.")
        return 0
    else:
        print("\n⚠️ Some checks failed. Please fix the issues above.")
        print("\nQuick fixes:")
        print("  - Install Python packages: pip install -r requirements.txt")
        print("  - Regenerate fixtures:     python create_test_data.py")
        print("  - Create .env file:        Copy from .env.example")
        return 1

if __name__ == '__main__':
    sys.exit(main())
