#include <stdio.h>
#include <string.h>
#include "qobj_emu.h"

static const char *BELL =
    "{\"qobj_id\":\"bell\",\"schema_version\":\"1.0.0\",\"type\":\"QASM\","
    "\"config\":{\"shots\":100,\"memory_slots\":2},"
    "\"experiments\":[{\"instructions\":["
    "{\"name\":\"u2\",\"qubits\":[0],\"params\":[0,3.141592653589793]},"
    "{\"name\":\"cx\",\"qubits\":[0,1]},"
    "{\"name\":\"measure\",\"qubits\":[0,1],\"memory\":[0,1]}]}]}";

int main(void) {
    QeBackend *b = NULL;
    char *out = NULL;
    uint64_t seed = 1;
    if (qe_backend_open("qasm_simulator", &b) != QE_STATUS_OK) return 10;
    if (qe_run(b, BELL, &seed, "c-job", &out) != QE_STATUS_OK) return 11;
    if (strstr(out, "\"job_id\":\"c-job\"") == NULL) return 12;
    printf("%s\n", out);
    qe_string_free(out);
    if (qe_backend_open("no_such_backend", &b) != QE_STATUS_NOT_FOUND) return 13;
    if (qe_last_error() == NULL) return 14;
    qe_backend_free(b);
    return 0;
}
