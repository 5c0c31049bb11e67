#include <math.h>
#include <stdio.h>

#include "rcqme.h"

int main(void) {
  RcqmeBath hot = {2.0, 28.0, 0.0071 / M_PI, 1000.0 * M_PI, 1.0};
  RcqmeBath cold = hot;
  cold.temperature = 0.5;
  RcqmeModel *model = NULL;
  if (rcqme_model_new(0.0, 1.0, &hot, &cold, &model) != RCQME_STATUS_OK) {
    fprintf(stderr, "%s\n", rcqme_last_error());
    return 1;
  }
  double j = 0.0;
  RcqmeStatus s = rcqme_current(model, RCQME_METHOD_RC_QME, 3, &j);
  printf("rcqme %s: J = %.6e (status %d)\n", rcqme_version(), j, (int)s);
  if (rcqme_current(model, 42, 3, &j) != RCQME_STATUS_DOMAIN) return 1;
  printf("bad method: %s\n", rcqme_last_error());
  rcqme_model_free(model);
  return s == RCQME_STATUS_OK ? 0 : 1;
}
