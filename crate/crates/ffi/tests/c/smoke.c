#include <math.h>
#include <stdio.h>
#include <string.h>

#include "sigkit.h"

static int fail(const char *what) {
    fprintf(stderr, "%s: %s\n", what, sigkit_last_error_message());
    return 1;
}

int main(void) {
    SigkitWordSet *ws = NULL;
    if (sigkit_wordset_from_json("{\"type\":\"truncated\",\"depth\":2}", 2, &ws) != SIGKIT_STATUS_OK)
        return fail("from_json");
    if (sigkit_wordset_len(ws) != 6) return fail("len");

    const double path[6] = {0.0, 0.0, 1.0, 0.0, 1.0, 1.0};
    const double expected[6] = {1.0, 1.0, 0.5, 1.0, 0.0, 0.5};
    double sig[6];
    if (sigkit_signature(ws, path, 1, 3, 2, sig, 6) != SIGKIT_STATUS_OK) return fail("signature");
    for (int i = 0; i < 6; i++)
        if (fabs(sig[i] - expected[i]) > 1e-15) return fail("values");

    char label[16];
    if (sigkit_wordset_label(ws, 3, label, sizeof label) != SIGKIT_STATUS_OK) return fail("label");
    if (strcmp(label, "1.2") != 0) return fail("label text");

    double small[2];
    if (sigkit_signature(ws, path, 1, 3, 2, small, 2) != SIGKIT_STATUS_BUFFER_SIZE) return fail("size check");
    if (strlen(sigkit_last_error_message()) == 0) return fail("message");

    sigkit_wordset_free(ws);
    printf("ok\n");
    return 0;
}
