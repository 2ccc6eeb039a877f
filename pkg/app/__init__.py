"""
饱和吸收慢光模拟器
多普勒展宽二能级介质在对向饱和泵浦下的探测磁化率、兰姆凹陷色散、群折射率与脉冲传播
"""

__version__ = "1.0.0"
