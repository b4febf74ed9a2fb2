#include <stdio.h>

#include "flexgrid.h"

int main(void) {
    double pts[] = {1, 1, 2, 5, 3, 2, 4, 8, 5, 3, 6, 6};
    FlexgridIndex *idx = NULL;
    if (flexgrid_build(2, pts, 6, 1, NULL, FLEXGRID_VARIANT_FLEXFLOOD, 0, &idx) != FLEXGRID_STATUS_OK) {
        fprintf(stderr, "build: %s\n", flexgrid_last_error());
        return 1;
    }
    double p[] = {2.5, 4};
    bool inserted = false;
    flexgrid_insert(idx, p, &inserted);

    double lo[] = {2, 2}, hi[] = {5, 6};
    double out[2 * 8];
    size_t count = 0;
    if (flexgrid_search(idx, lo, hi, out, 8, &count) != FLEXGRID_STATUS_OK) {
        fprintf(stderr, "search: %s\n", flexgrid_last_error());
        flexgrid_free(idx);
        return 1;
    }
    for (size_t i = 0; i < count; i++) {
        printf("%g %g\n", out[2 * i], out[2 * i + 1]);
    }
    flexgrid_free(idx);
    return 0;
}
