/* cc -I crates/ffi/include crates/ffi/examples/smoke.c target/release/libfrobjet_ffi.a -lm -lpthread -ldl -o smoke */
#include <stdio.h>
#include "frobjet.h"

int main(int argc, char **argv) {
    const char *path = argc > 1 ? argv[1] : "configs/kdv.json";
    FjManifold *m = NULL;
    if (fj_manifold_from_path(path, &m) != FJ_STATUS_OK) {
        fprintf(stderr, "load: %s\n", fj_last_error());
        return 2;
    }
    char *report = NULL;
    FjStatus st = fj_run(m, FJ_COMMAND_VALIDATE, NULL, NULL, &report);
    if (report) {
        fputs(report, stdout);
        fj_string_free(report);
    } else {
        fprintf(stderr, "validate: %s\n", fj_last_error());
    }
    fj_manifold_free(m);
    return (int)st;
}
