#include <stdio.h>
#include "borb.h"

int main(void) {
  BorbModel *model = NULL;
  BorbSpace *space = NULL;
  double k = 0.0;
  if (borb_model_new(BORB_MODEL_KIND_FOOTBALL, 3, 0.0, 1, false, &model) != BORB_STATUS_OK ||
      borb_space_new(model, 12, 0, 0, &space) != BORB_STATUS_OK ||
      borb_bergman_kernel(space, 0.5, 0.25, &k) != BORB_STATUS_OK) {
    fprintf(stderr, "borb: %s\n", borb_last_error());
    borb_model_free(model);
    return 1;
  }
  printf("dim %zu, kernel %.12f\n", borb_space_dimension(space), k);
  borb_space_free(space);
  borb_model_free(model);
  return 0;
}
