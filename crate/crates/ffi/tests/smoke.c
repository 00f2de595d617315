#include <math.h>
#include <stdio.h>
#include "concordance.h"

int main(void) {
    ConcordanceModel *m = NULL;
    if (concordance_model_new("triple-quadric", &m) != CONCORDANCE_STATUS_OK) return 1;
    size_t word[3] = {1, 2, 3};
    double h = 0, r = 0;
    if (concordance_model_entropy(m, word, 3, &h, &r) != CONCORDANCE_STATUS_OK) return 2;
    concordance_model_free(m);
    if (fabs(h - log(9 + 4 * sqrt(5))) > 1e-9) return 3;

    if (concordance_model_new("nope", &m) != CONCORDANCE_STATUS_INVALID_ARGUMENT || m != NULL) return 4;
    if (concordance_last_error()[0] == '\0') return 5;

    ConcordanceCurve *c = NULL;
    if (concordance_curve_builtin(0, 2, 1024, &c) != CONCORDANCE_STATUS_OK) return 6;
    double est = 0, se = 0;
    if (concordance_crofton_length(c, 10000, 7, &est, &se) != CONCORDANCE_STATUS_OK) return 7;
    concordance_curve_free(c);
    if (fabs(est - M_PI) > 0.02 * M_PI) return 8;

    printf("ok %.12f %.6f\n", h, est);
    return 0;
}
