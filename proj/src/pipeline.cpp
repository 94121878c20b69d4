#include "scfqkd/pipeline.hpp"

#include <stdexcept>

namespace scfqkd {

PipelineResult evaluate_pipeline(const ProtocolConfig& protocol, const ChannelConfig& channel,
                                 Mode mode) {
    validate_config(protocol, channel);
    PipelineResult result;
    result.stats = asymptotic_stats(protocol, channel);
    result.coeffs = make_coefficients(protocol);
    result.summary = make_security_summary(result.stats, protocol, result.coeffs);
    switch (mode) {
        case Mode::original:
            result.report =
                key_rate_original(result.summary, effective_key_bits(result.stats, protocol),
                                  result.stats.e_k, channel.f, protocol.n_windows);
            break;
        case Mode::twcc:
            result.report = key_rate_twcc(result.summary, expected_twcc_stats(result.stats, protocol),
                                          channel.f, protocol.n_windows);
            break;
        case Mode::aopp:
            result.report = key_rate_aopp(result.summary, expected_aopp_stats(result.stats, protocol),
                                          channel.f, protocol.n_windows);
            break;
    }
    return result;
}

KeyRateReport report_from_stats(const WindowStats& stats, const ProtocolConfig& protocol,
                                const ChannelConfig& channel, Mode mode, const TwccStats* twcc,
                                const AoppStats* aopp) {
    const BoundCoefficients coeffs = make_coefficients(protocol);
    const SecuritySummary summary = make_security_summary(stats, protocol, coeffs);
    switch (mode) {
        case Mode::original:
            return key_rate_original(summary, effective_key_bits(stats, protocol), stats.e_k,
                                     channel.f, protocol.n_windows);
        case Mode::twcc:
            if (!twcc) throw std::invalid_argument("report_from_stats: twcc stats required");
            return key_rate_twcc(summary, *twcc, channel.f, protocol.n_windows);
        case Mode::aopp:
            if (!aopp) throw std::invalid_argument("report_from_stats: aopp stats required");
            return key_rate_aopp(summary, *aopp, channel.f, protocol.n_windows);
    }
    throw std::logic_error("report_from_stats: unreachable");
}

}  // namespace scfqkd
