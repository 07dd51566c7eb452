#include <math.h>
#include <stdio.h>

#include "kdv_elliptic.h"

static int check(int ok, const char *what) {
  if (!ok) fprintf(stderr, "failed: %s\n", what);
  return ok ? 0 : 1;
}

int main(void) {
  int bad = 0;
  double v = 0.0;
  bad += check(kdv_wp(4.0, 0.0, 1.0, &v) == KDV_STATUS_OK, "wp status");
  bad += check(fabs(v - 1.2137559863387746) < 1e-13, "wp value");
  bad += check(kdv_wp(0.3, 0.7, 0.0, &v) == KDV_STATUS_POLE_PROXIMITY, "wp pole");

  const double deltas[] = {-0.02, 0.04};
  KdvSolution *sol = NULL;
  bad += check(kdv_solution_new(0.3, 0.7, deltas, 2, &sol) == KDV_STATUS_OK, "build");
  double z = 0.0, u = 0.0;
  bad += check(kdv_solution_eval(sol, 0.7, &z, &u) == KDV_STATUS_OK, "eval");
  bad += check(fabs(z + 52.772107372468061) < 1e-11, "z12");
  bad += check(fabs(u - 3.8870529202671703) < 1e-11, "u12");
  kdv_solution_free(sol);

  bad += check(kdv_status_message(KDV_STATUS_DEGENERATE_DELTAS)[0] != '\0', "message");
  printf("%d failures\n", bad);
  return bad;
}
