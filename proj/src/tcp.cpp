#include "attentiv/tcp.hpp"

#include "attentiv/error.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

namespace attentiv::net {

namespace {

Error net_error(const std::string& what) {
  return Error(ErrorKind::network, what + ": " + std::strerror(errno));
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

// Appends received bytes to buffer; false on EOF or error.
bool receive(int fd, std::string& buffer) {
  char chunk[8192];
  while (true) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(n));
    return true;
  }
}

std::optional<std::string> take_line(std::string& buffer) {
  const auto nl = buffer.find('\n');
  if (nl == std::string::npos) return std::nullopt;
  std::string line = buffer.substr(0, nl);
  buffer.erase(0, nl + 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

TcpServer::TcpServer(wire::ProtocolHandler& handler, std::uint16_t port,
                     std::string bind_address)
    : handler_(handler), port_(port), bind_address_(std::move(bind_address)) {}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw net_error("socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (::inet_pton(AF_INET, bind_address_.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorKind::network, "invalid bind address " + bind_address_);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    const Error e = net_error("cannot listen on " + bind_address_ + ":" + std::to_string(port_));
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw e;
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;  // listening socket shut down
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(mutex_);
    if (!running_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void TcpServer::serve(int fd) {
  serve_lines(fd);
  std::lock_guard lock(mutex_);
  std::erase(client_fds_, fd);
  ::close(fd);
}

void TcpServer::serve_lines(int fd) {
  std::string buffer;
  while (true) {
    while (auto line = take_line(buffer)) {
      if (line->empty()) continue;
      std::string out;
      for (const auto& reply : handler_.handle_line(*line)) out += reply + "\n";
      if (!send_all(fd, out)) return;
    }
    if (buffer.size() > kMaxLineBytes) {
      send_all(fd, wire::error_json("parse", "line exceeds the size limit").dump() + "\n");
      return;
    }
    if (!receive(fd, buffer)) return;
  }
}

void TcpServer::stop() {
  running_ = false;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::list<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    for (const int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void TcpServer::wait() {
  while (running_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

LineClient::LineClient(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorKind::network, "cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int last_errno = 0;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd_ = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd_ < 0) continue;
    if (::connect(fd_, a->ai_addr, a->ai_addrlen) == 0) break;
    last_errno = errno;
    ::close(fd_);
    fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) {
    errno = last_errno;
    throw net_error("cannot connect to " + host + ":" + service);
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

void LineClient::send_line(const std::string& line) {
  if (!send_all(fd_, line + "\n")) throw net_error("send failed");
}

std::optional<std::string> LineClient::read_line() {
  while (true) {
    if (auto line = take_line(buffer_)) return line;
    if (!receive(fd_, buffer_)) return std::nullopt;
  }
}

std::vector<wire::json> LineClient::request(const wire::json& message) {
  send_line(message.dump());
  std::vector<wire::json> replies;
  while (true) {
    const auto line = read_line();
    if (!line) throw Error(ErrorKind::network, "connection closed before a reply arrived");
    replies.push_back(wire::json::parse(*line));
    if (wire::is_terminal(replies.back())) return replies;
  }
}

}  // namespace attentiv::net
