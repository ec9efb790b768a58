#include <stdio.h>
#include <string.h>
#include "shc.h"

int main(void) {
    ShcModel *m = NULL;
    ShcDomain *d = NULL;
    ShcEstimate e;
    if (shc_model_stable(2, 0.5, &m) != SHC_STATUS_OK) return 10;
    if (shc_domain_ball(2, NULL, 1.0, &d) != SHC_STATUS_OK) return 11;
    if (shc_perimeter(m, d, &e) != SHC_STATUS_OK) return 12;
    printf("%.9f %g\n", e.value, e.std_error);
    shc_model_free(m);
    if (shc_model_stable(2, 1.5, &m) != SHC_STATUS_OK) return 13;
    if (shc_perimeter(m, d, &e) != SHC_STATUS_DIVERGENT_PERIMETER) return 14;
    if (strlen(shc_last_error()) == 0) return 15;
    shc_model_free(m);
    shc_domain_free(d);
    return 0;
}
