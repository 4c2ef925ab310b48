#include <math.h>
#include <stdio.h>
#include <string.h>

#include "hapticvlm.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(int argc, char **argv) {
    if (argc < 3) {
        fprintf(stderr, "usage: smoke <materials.txt> <out.wav>\n");
        return 2;
    }
    double a[] = {1, 2, 3}, b[] = {4, 5, 6}, cos = 0;
    CHECK(hv_cosine_similarity(a, b, 3, &cos) == HV_STATUS_OK);
    CHECK(fabs(cos - 32.0 / sqrt(14.0 * 77.0)) < 1e-12);

    double zero[] = {0, 0, 0};
    CHECK(hv_cosine_similarity(a, zero, 3, &cos) == HV_STATUS_DEGENERATE_VECTOR);
    char msg[256];
    size_t needed = 0;
    CHECK(hv_last_error_message(msg, sizeof msg, &needed) == HV_STATUS_OK);
    CHECK(needed > 1);

    HvDatabase *db = NULL;
    CHECK(hv_database_load(argv[1], &db) == HV_STATUS_OK);
    CHECK(hv_database_dimension(db) == 8);
    double q[8] = {0};
    q[4] = 1.0;
    HvMatch m;
    CHECK(hv_database_match(db, q, 8, 0.0, &m) == HV_STATUS_OK);
    char name[64];
    CHECK(hv_database_name(db, m.index, name, sizeof name, NULL) == HV_STATUS_OK);
    CHECK(strcmp(name, "steel") == 0);
    CHECK(hv_database_match(db, q, 8, 0.999, &m) == HV_STATUS_NO_MATCH);
    CHECK(hv_database_match(db, q, 3, 0.0, &m) == HV_STATUS_DIMENSION_MISMATCH);
    hv_database_free(db);

    HvSamples *s = NULL;
    CHECK(hv_synth_render("GT", 8000, &s) == HV_STATUS_OK);
    CHECK(hv_samples_len(s) == 16000);
    CHECK(hv_samples_export_wav(s, argv[2]) == HV_STATUS_OK);
    hv_samples_free(s);
    CHECK(hv_synth_render("XX", 8000, &s) == HV_STATUS_UNKNOWN_PATTERN);

    double c = 0;
    CHECK(hv_parse_temperature("about 68°F", &c) == HV_STATUS_OK);
    CHECK(fabs(c - 20.0) < 1e-9);

    double p = 0;
    CHECK(hv_f_survival(2.59, 1, 8, &p) == HV_STATUS_OK);
    CHECK(fabs(p - 0.146) < 0.002);

    HvThermal *t = NULL;
    CHECK(hv_thermal_new(&t) == HV_STATUS_OK);
    CHECK(hv_thermal_set_mode(t, HV_THERMAL_MODE_HOT) == HV_STATUS_OK);
    double plate = 0;
    CHECK(hv_thermal_step(t, 2.0, &plate) == HV_STATUS_OK);
    CHECK(fabs(plate - (40.0 - 15.0 * exp(-1.0))) < 1e-9);
    hv_thermal_free(t);

    puts("ok");
    return 0;
}
