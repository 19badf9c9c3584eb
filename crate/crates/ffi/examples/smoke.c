#include <stdio.h>
#include <string.h>
#include "subdyn.h"

int main(void) {
    SubdynSubstitution *fib = NULL;
    if (subdyn_substitution_parse("a -> ab\nb -> a", &fib) != SUBDYN_STATUS_OK) {
        fprintf(stderr, "%s\n", subdyn_last_error_message());
        return 1;
    }
    char *path = NULL;
    if (subdyn_encode(fib, 'a', 7, &path) != SUBDYN_STATUS_OK || strcmp(path, "a: a.e.a.e") != 0) {
        return 2;
    }
    uint64_t value = 0;
    if (subdyn_decode(fib, path, &value, NULL) != SUBDYN_STATUS_OK || value != 7) {
        return 3;
    }
    printf("%s = %llu\n", path, (unsigned long long)value);
    subdyn_string_free(path);
    subdyn_substitution_free(fib);

    SubdynSubstitution *bad = NULL;
    if (subdyn_substitution_parse("a -> ab\na -> ba", &bad) != SUBDYN_STATUS_INVALID_INPUT || bad != NULL) {
        return 4;
    }
    printf("%s\n", subdyn_last_error_message());
    return 0;
}
