#include <math.h>
#include <stdio.h>
#include "qlspec.h"

int main(void) {
    QlsMatter *m = NULL;
    if (qls_matter_new_two_level(1.0, 1.0, 0.05, &m) != QLS_STATUS_OK) {
        fprintf(stderr, "%s\n", qls_last_error());
        return 1;
    }
    QlsComplex z;
    if (qls_chi1(m, INFINITY, 0.9, &z) != QLS_STATUS_OK) {
        return 2;
    }
    QlsMode mode = {1.0, 0.1, 12, QLS_MODE_KIND_COHERENT, 1.0, 0.0};
    QlsField *f = NULL;
    if (qls_field_new(&mode, 1, &f) != QLS_STATUS_OK) {
        return 3;
    }
    double total = 0.0;
    QlsComplex gates[4];
    if (qls_signal(m, INFINITY, f, 0, QLS_SIGNAL_KIND_QUANTUM, QLS_ORDER_THIRD, &total, gates) != QLS_STATUS_OK) {
        return 4;
    }
    if (qls_chi3(m, INFINITY, 1.0, 0.5, 0.5, 0.5, &z) != QLS_STATUS_ARGUMENT || qls_last_error() == NULL) {
        return 5;
    }
    printf("%.17g %.17g %.17g\n", z.re, z.im, total);
    qls_field_free(f);
    qls_matter_free(m);
    return 0;
}
