// Runs the gateway protocol conformance suite against a live gateway.
#include "semcomp/gateway.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Model gateway conformance check"};
    semcomp::GatewayOptions options = semcomp::gateway_options_from_env();
    app.add_option("--url", options.url, "Gateway base URL");
    app.add_option("--timeout-ms", options.timeout_ms, "Request timeout");
    app.add_option("--batch-cap", options.batch_cap, "Gateway /embed batch cap");
    CLI11_PARSE(app, argc, argv);

    const semcomp::GatewayClient client(options);
    int failures = 0;
    for (const auto& check : semcomp::run_conformance(client)) {
        std::cout << (check.passed ? "PASS " : "FAIL ") << check.name;
        if (!check.passed) {
            std::cout << ": " << check.detail;
            ++failures;
        }
        std::cout << "\n";
    }
    return failures == 0 ? 0 : 1;
}
