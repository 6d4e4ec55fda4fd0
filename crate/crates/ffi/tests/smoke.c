#include <stdio.h>
#include <string.h>

#include "d3net.h"

int main(void) {
    D3Network *net = NULL;
    if (d3_network_new(2, 4, &net) != D3_STATUS_OK) {
        fprintf(stderr, "%s\n", d3_last_error());
        return 1;
    }
    D3Addr src = {0, 0, 0};
    D3Addr dst = {1, 2, 3};
    D3Header h;
    if (d3_header_for(net, src, dst, &h) != D3_STATUS_OK || h.gamma != 1 || h.pi != 3 || h.delta != 2) {
        return 2;
    }
    D3SimOptions opts;
    memset(&opts, 0, sizeof opts);
    opts.primitive = D3_PRIMITIVE_ALL_TO_ALL;
    D3Metrics *metrics = NULL;
    if (d3_simulate(net, &opts, &metrics) != D3_STATUS_OK) {
        return 3;
    }
    D3Summary s;
    d3_metrics_summary(metrics, &s);
    printf("rounds=%llu delays=%llu conflicts=%llu deliveries=%llu\n",
           (unsigned long long)s.rounds, (unsigned long long)s.delays,
           (unsigned long long)s.conflicts, (unsigned long long)s.deliveries);
    d3_metrics_free(metrics);
    d3_network_free(net);
    net = NULL;
    if (d3_network_new(0, 0, &net) != D3_STATUS_INVALID_ARGUMENT || strlen(d3_last_error()) == 0) {
        return 4;
    }
    d3_network_free(NULL);
    return 0;
}
