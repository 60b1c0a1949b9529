#include <stdio.h>
#include <string.h>
#include "qdg.h"

int main(void) {
    /* [1,-i;i,-2] and [-2,i;-i,1], both strict. */
    double re[8] = {1, 0, 0, -2, -2, 0, 0, 1};
    double im[8] = {0, -1, 1, 0, 0, 1, -1, 0};
    uint8_t strict[2] = {1, 1};
    int coherent = -1;
    double margin = 0, alpha[2] = {0, 0}, beta = 0;
    if (qdg_check_coherence(2, 2, re, im, strict, &coherent, &margin, alpha, &beta) != QDG_STATUS_OK) return 1;
    if (coherent != 0 || beta < 1 - 1e-8) return 2;

    QdgCredalSet *vac = qdg_credal_vacuous(2);
    double lo = 0, up = 0;
    if (qdg_prevision(vac, re, im, &lo, &up) != QDG_STATUS_OK) return 3;
    qdg_credal_free(vac);

    double bad[4] = {1, 2, 0, 1};
    QdgCredalSet *out = NULL;
    if (qdg_credal_from_extreme_points(2, 1, bad, NULL, &out) != QDG_STATUS_NOT_HERMITIAN) return 4;
    char msg[256];
    if (qdg_last_error_message(msg, sizeof msg) == 0) return 5;

    printf("%.10f %.10f %s\n", lo, up, qdg_version());
    return 0;
}
