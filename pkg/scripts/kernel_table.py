"""Print the compliance checks of every registered kernel."""

from condmode.kernels import check_compliance, get_kernel, kernel_names

for role in ("K", "H"):
    for name in kernel_names(role):
        rep = check_compliance(get_kernel(role, name))
        checks = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in rep.checks.items())
        details = ", ".join(f"{k}={v:.6g}" for k, v in rep.details.items())
        print(f"{role} {name:<13} {'PASS' if rep.passed else 'FAIL'}  {checks}")
        print(f"  {details}")
