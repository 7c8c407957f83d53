// Runs scenario 1 end to end and prints the headline numbers.
#include <iostream>

#include "fogddos/fogddos.hpp"

int main() {
    using namespace fogddos;
    auto config = preset_config("scenario1");
    RunOptions options;
    options.sample_resources = false;
    const auto run = run_scenario(config, options);

    std::cout << "forwarded " << run.firewall.forwarded << " of " << run.firewall.total << ", PDR "
              << render_rate(to_percent(packet_delivery_ratio(run.firewall)).to_double()) << "%\n";
    if (run.detection.detection_rate)
        std::cout << "detection rate " << render_rate(to_percent(*run.detection.detection_rate).to_double()) << "%\n";
    const auto& m = run.cloud.mitigation;
    if (m.mitigation_rate)
        std::cout << "mitigated " << m.mitigated_packets << " of " << m.confirmed_packets << " confirmed ("
                  << render_rate(to_percent(*m.mitigation_rate).to_double()) << "%)\n";
    else
        std::cout << "mitigation not applicable\n";
}
