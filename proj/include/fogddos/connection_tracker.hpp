#pragma once

#include <map>
#include <tuple>

#include "fogddos/core_model.hpp"

namespace fogddos {

enum class ConnState : std::uint8_t { NONE, SYN_SENT, ESTABLISHED, CLOSED };

struct FlowKey {
    Ipv4Address src_ip;
    std::uint16_t src_port = 0;
    Ipv4Address dst_ip;
    std::uint16_t dst_port = 0;

    static FlowKey of(const Packet& p) { return {p.src_ip, p.src_port, p.dst_ip, p.dst_port}; }
    friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

/// What a packet did to its flow.
enum class Transition : std::uint8_t {
    None,
    Opened,             // NONE/CLOSED -> SYN_SENT
    Retransmit,         // SYN while SYN_SENT
    Established,        // handshake ACK, SYN_SENT -> ESTABLISHED
    Closed,             // FIN or RST
    SynOnEstablished,   // violation
    AckWithoutSyn,      // violation
    SynFin,             // violation
};

/// Client-side TCP handshake state per (src:port, dst:port), plus the
/// half-open (SYN_SENT) count per destination address.
class ConnectionTracker {
public:
    Transition observe(const Packet& p) {
        if (p.protocol != Protocol::TCP) return Transition::None;
        const FlagSet f = p.tcp_flags;
        if (f.has(TcpFlag::SYN) && f.has(TcpFlag::FIN)) return Transition::SynFin;
        const auto key = FlowKey::of(p);

        if (f.syn_only()) {
            auto& st = flows_[key];
            switch (st) {
                case ConnState::ESTABLISHED: return Transition::SynOnEstablished;
                case ConnState::SYN_SENT: return Transition::Retransmit;
                case ConnState::NONE:
                case ConnState::CLOSED:
                    st = ConnState::SYN_SENT;
                    ++half_open_[p.dst_ip];
                    return Transition::Opened;
            }
        }
        if (f.has(TcpFlag::SYN)) return Transition::None;  // SYN-ACK and other SYN combos

        auto it = flows_.find(key);
        const ConnState st = it == flows_.end() ? ConnState::NONE : it->second;
        const bool closing = f.has(TcpFlag::FIN) || f.has(TcpFlag::RST);
        if (f.has(TcpFlag::ACK)) {
            if (st == ConnState::NONE) return Transition::AckWithoutSyn;
            if (st == ConnState::SYN_SENT) {
                --half_open_[p.dst_ip];
                it->second = closing ? ConnState::CLOSED : ConnState::ESTABLISHED;
                return Transition::Established;
            }
        }
        if (closing && it != flows_.end() && st != ConnState::CLOSED) {
            if (st == ConnState::SYN_SENT) --half_open_[p.dst_ip];
            it->second = ConnState::CLOSED;
            return Transition::Closed;
        }
        return Transition::None;
    }

    ConnState state(const FlowKey& k) const {
        auto it = flows_.find(k);
        return it == flows_.end() ? ConnState::NONE : it->second;
    }

    std::uint64_t half_open(Ipv4Address dst) const {
        auto it = half_open_.find(dst);
        return it == half_open_.end() ? 0 : it->second;
    }

private:
    std::map<FlowKey, ConnState> flows_;
    std::map<Ipv4Address, std::uint64_t> half_open_;
};

}  // namespace fogddos
