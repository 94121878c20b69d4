#pragma once

#include "scfqkd/channel.hpp"
#include "scfqkd/core.hpp"
#include "scfqkd/rates.hpp"

namespace scfqkd {

// Asymptotic evaluation end to end: analytic window statistics, bound
// coefficients, security summary, key rate for the requested mode.
struct PipelineResult {
    WindowStats stats;
    BoundCoefficients coeffs;
    SecuritySummary summary;
    KeyRateReport report;
};

PipelineResult evaluate_pipeline(const ProtocolConfig& protocol, const ChannelConfig& channel,
                                 Mode mode);

inline double evaluate_key_rate(const ProtocolConfig& protocol, const ChannelConfig& channel,
                                Mode mode) {
    return evaluate_pipeline(protocol, channel, mode).report.key_rate;
}

// Key-rate report from already-measured ingredients (the Monte-Carlo
// path): estimated window statistics plus bit-level post-processing
// outcomes where the mode needs them.
KeyRateReport report_from_stats(const WindowStats& stats, const ProtocolConfig& protocol,
                                const ChannelConfig& channel, Mode mode, const TwccStats* twcc,
                                const AoppStats* aopp);

}  // namespace scfqkd
