/* SPDX-License-Identifier: Apache-2.0 */
/* Compiled as C11: proves the public header is consumable from plain C. */
#include "ann/ann.h"

int ann_capi_compiles_in_c(void) {
  const char* message = ann_last_error();
  const char* name = ann_status_name(ANN_OK);
  return message != 0 && name != 0;
}
